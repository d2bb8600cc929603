"""External language-model adjudicator breaking 1-1 annotator ties.

Only the objective dimensions may be adjudicated; subjective judgments
(convincingness, overall quality) are never delegated to a model. The
client is an abstract text-completion interface with a live HTTP backend
and a deterministic fixture backend, selected through
ADJUDICATOR_BACKEND={live|fixture:PATH}. Every adjudication is appended to
a log so tie provenance stays auditable.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from .judgments import OBJECTIVE_DIMENSIONS

log = logging.getLogger(__name__)

DIMENSION_QUESTIONS = {
    "article_contradiction": "Does the explanation contradict the evidence?",
    "self_contradiction": "Does the explanation contradict itself?",
    "hallucination": "Does the explanation include information or facts that are not present in the evidence?",
}


class AdjudicationError(RuntimeError):
    """Adjudicator unreachable or its answer unparseable; the tie stands."""


class SubjectiveDimensionError(ValueError):
    """Adjudication requested for a dimension that is not objective."""


@dataclass(frozen=True)
class SummaryBundle:
    """Texts of one annotated summary: shown to the adjudicator and human
    annotators, and concatenated into the metric model's input."""

    summary_id: str
    claim: str
    evidence: str
    explanation: str
    verdict: str = ""


def load_prompt_template() -> str:
    ref = resources.files("factexpl.annotation").joinpath("data/adjudicator_prompt.txt")
    return ref.read_text(encoding="utf-8")


def build_prompt(summary: SummaryBundle, dimension: str) -> str:
    return load_prompt_template().format(
        claim=summary.claim,
        evidence=summary.evidence,
        explanation=summary.explanation,
        question=DIMENSION_QUESTIONS[dimension],
    )


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class FixtureAdjudicator:
    """Answers from a JSON file: {"<summary_id>:<dimension>": true/false}.

    Missing keys raise AdjudicationError, which lets fixtures simulate an
    unreachable adjudicator for specific summaries.
    """

    def __init__(self, path: str | Path):
        with open(path, encoding="utf-8") as fh:
            self._answers: dict[str, bool] = json.load(fh)

    def complete(self, prompt: str) -> str:
        raise NotImplementedError("fixture adjudicator answers by key, not by prompt")

    def answer(self, summary_id: str, dimension: str) -> bool:
        key = f"{summary_id}:{dimension}"
        if key not in self._answers:
            raise AdjudicationError(f"no recorded adjudication for {key}")
        return bool(self._answers[key])


class LiveAdjudicator:
    """Chat-completions HTTP client (OpenAI-compatible schema)."""

    def __init__(
        self,
        api_key: str | None = None,
        base_url: str = "https://api.openai.com/v1",
        model: str = "gpt-3.5-turbo",
        min_interval: float = 0.0,
        session: requests.Session | None = None,
    ):
        self.api_key = api_key or os.environ.get("ADJUDICATOR_API_KEY")
        if not self.api_key:
            raise RuntimeError("ADJUDICATOR_API_KEY is not configured")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.session = session or requests.Session()
        self._lock = threading.Lock()
        self._min_interval = min_interval
        self._last_call = 0.0

    def complete(self, prompt: str) -> str:
        with self._lock:  # simple rate limit for concurrent tie-break batches
            wait = self._min_interval - (time.monotonic() - self._last_call)
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()
        try:
            resp = self.session.post(
                f"{self.base_url}/chat/completions",
                headers={"Authorization": f"Bearer {self.api_key}"},
                json={
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                    "temperature": 0,
                },
                timeout=60,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            raise AdjudicationError(f"adjudicator call failed: {exc}") from exc


def parse_yes_no(answer: str) -> bool:
    tokens = answer.strip().lower().split()
    first = tokens[0].strip(".,!:;") if tokens else ""
    if first in ("yes", "no"):
        return first == "yes"
    raise AdjudicationError(f"unparseable adjudicator answer: {answer!r}")


class Adjudicator:
    """Tie-breaker facade with an append-only adjudication log."""

    def __init__(self, client: CompletionClient | FixtureAdjudicator, log_path: str | Path | None = None):
        self.client = client
        self.log_path = Path(log_path) if log_path else None
        self._log_lock = threading.Lock()

    def adjudicate_tie(self, summary: SummaryBundle, dimension: str) -> bool:
        if dimension not in OBJECTIVE_DIMENSIONS:
            raise SubjectiveDimensionError(
                f"{dimension!r} is subjective; model adjudication is restricted to {OBJECTIVE_DIMENSIONS}"
            )
        if isinstance(self.client, FixtureAdjudicator):
            verdict = self.client.answer(summary.summary_id, dimension)
        else:
            verdict = parse_yes_no(self.client.complete(build_prompt(summary, dimension)))
        self._append_log(summary.summary_id, dimension, verdict)
        return verdict

    def _append_log(self, summary_id: str, dimension: str, verdict: bool):
        if not self.log_path:
            return
        with self._log_lock:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"summary_id": summary_id, "dimension": dimension, "verdict": verdict}) + "\n")


def adjudicator_from_env(log_path: str | Path | None = None) -> Adjudicator:
    spec = os.environ.get("ADJUDICATOR_BACKEND", "live")
    if spec.startswith("fixture:"):
        return Adjudicator(FixtureAdjudicator(spec.split(":", 1)[1]), log_path=log_path)
    if spec == "live":
        return Adjudicator(LiveAdjudicator(), log_path=log_path)
    raise ValueError(f"unknown ADJUDICATOR_BACKEND {spec!r}; expected 'live' or 'fixture:PATH'")
