"""Search-snippet retrieval used as noisy alternative evidence.

The backend is pluggable: a live engine client and a deterministic fixture
reader selected through SEARCH_BACKEND={live|fixture:PATH}. CI and tests run
fixtures only. The article that fact-checks the claim is excluded by domain.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol
from urllib.parse import urlparse

import requests

log = logging.getLogger(__name__)

MAX_SNIPPETS = 10


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchSnippet:
    rank: int
    snippet_text: str
    source_url: str


@dataclass(frozen=True)
class SearchSnippetSet:
    claim_text: str
    snippets: tuple[SearchSnippet, ...]
    excluded_domain: str

    def __post_init__(self):
        if len(self.snippets) > MAX_SNIPPETS:
            raise ValueError(f"at most {MAX_SNIPPETS} snippets allowed, got {len(self.snippets)}")
        ranks = [s.rank for s in self.snippets]
        if len(set(ranks)) != len(ranks) or ranks != sorted(ranks):
            raise ValueError(f"snippet ranks must be unique and ascending, got {ranks}")
        for s in self.snippets:
            if _host_matches(s.source_url, self.excluded_domain):
                raise ValueError(f"snippet from excluded domain {self.excluded_domain}: {s.source_url}")

    def to_row(self) -> dict:
        return {
            "claim": self.claim_text,
            "excluded_domain": self.excluded_domain,
            "snippets": [
                {"rank": s.rank, "snippet": s.snippet_text, "url": s.source_url} for s in self.snippets
            ],
        }

    @classmethod
    def from_row(cls, row: dict) -> "SearchSnippetSet":
        return cls(
            claim_text=row["claim"],
            snippets=tuple(
                SearchSnippet(rank=s["rank"], snippet_text=s["snippet"], source_url=s["url"])
                for s in row["snippets"]
            ),
            excluded_domain=row["excluded_domain"],
        )


def _host_matches(url: str, domain: str) -> bool:
    host = urlparse(url).netloc.lower()
    host = host.removeprefix("www.")
    return host == domain.lower().removeprefix("www.")


class SearchBackend(Protocol):
    def search(self, claim: str) -> list[dict]:
        """Ranked hits as {snippet, url} dicts, best first."""


class FixtureSearchBackend:
    """Deterministic backend reading a JSON file: {claim: [{snippet, url}, ...]}."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        with open(self.path, encoding="utf-8") as fh:
            self._data: dict[str, list[dict]] = json.load(fh)

    def search(self, claim: str) -> list[dict]:
        return list(self._data.get(claim, []))


class LiveSearchBackend:
    """Thin client for a JSON web-search API (Google Custom Search schema)."""

    def __init__(self, api_key: str | None = None, engine_id: str | None = None,
                 session: requests.Session | None = None):
        self.api_key = api_key or os.environ.get("SEARCH_API_KEY")
        self.engine_id = engine_id or os.environ.get("SEARCH_ENGINE_ID")
        if not self.api_key:
            raise RuntimeError("SEARCH_API_KEY is not configured")
        self.session = session or requests.Session()

    def search(self, claim: str) -> list[dict]:
        try:
            resp = self.session.get(
                "https://www.googleapis.com/customsearch/v1",
                params={"key": self.api_key, "cx": self.engine_id, "q": claim, "num": MAX_SNIPPETS},
                timeout=30,
            )
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise TransportError(f"search backend unavailable: {exc}") from exc
        items = resp.json().get("items") or []
        return [{"snippet": it.get("snippet", ""), "url": it.get("link", "")} for it in items]


def backend_from_env() -> SearchBackend:
    spec = os.environ.get("SEARCH_BACKEND", "live")
    if spec.startswith("fixture:"):
        return FixtureSearchBackend(spec.split(":", 1)[1])
    if spec == "live":
        return LiveSearchBackend()
    raise ValueError(f"unknown SEARCH_BACKEND {spec!r}; expected 'live' or 'fixture:PATH'")


def fetch_snippets(claim: str, excluded_domain: str, backend: SearchBackend | None = None) -> SearchSnippetSet:
    """Top hits for the claim, minus the fact-checking site itself.

    Backend ranking order is preserved and original rank numbers are kept
    (holes mark excluded hits). Zero results is a valid empty set.
    """
    backend = backend or backend_from_env()
    hits = backend.search(claim)[:MAX_SNIPPETS]
    kept = []
    for rank, hit in enumerate(hits, start=1):
        if _host_matches(hit["url"], excluded_domain):
            log.debug("dropping excluded-domain hit %s for claim %r", hit["url"], claim[:60])
            continue
        kept.append(SearchSnippet(rank=rank, snippet_text=hit["snippet"], source_url=hit["url"]))
    return SearchSnippetSet(claim_text=claim, snippets=tuple(kept), excluded_domain=excluded_domain)
