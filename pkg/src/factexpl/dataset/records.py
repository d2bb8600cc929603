"""Core dataset value types and their JSONL serialization.

Dataset rows use exactly these field names: id, claim, evidence_kind,
article, snippets, verdict, explanation, publisher, nominal_label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from ..jsonl import read_jsonl, write_jsonl

PUBLISHERS = ("bbc", "fullfact", "factcheck")

EVIDENCE_KINDS = ("article", "snippets", "snippets_expanded")
EXPANSION_STRATEGIES = ("none", "exact_match", "lexical_sim")


@dataclass(frozen=True)
class EvidenceBundle:
    """Either a full fact-check article or (optionally expanded) search snippets."""

    kind: str
    article_text: Optional[str] = None
    snippets: Optional[tuple[str, ...]] = None
    expansion_strategy: Optional[str] = None
    ls_threshold: Optional[float] = None

    def __post_init__(self):
        if self.kind not in EVIDENCE_KINDS:
            raise ValueError(f"unknown evidence kind {self.kind!r}")
        if self.kind == "article" and self.article_text is None:
            raise ValueError("article evidence requires article_text")
        if self.kind in ("snippets", "snippets_expanded") and self.snippets is None:
            raise ValueError(f"{self.kind} evidence requires snippets")
        if self.expansion_strategy == "lexical_sim" and self.ls_threshold is None:
            raise ValueError("lexical_sim expansion requires ls_threshold")

    def text(self) -> str:
        """Evidence as one string; snippet lists join with newline."""
        if self.kind == "article":
            return self.article_text or ""
        return "\n".join(self.snippets or ())


@dataclass(frozen=True)
class ClaimRecord:
    """One claim with its evidence, free-form verdict and ground-truth explanation."""

    id: str
    claim: str
    evidence: EvidenceBundle
    verdict_text: str
    explanation: str
    publisher: str
    nominal_label: Optional[str] = None

    def __post_init__(self):
        if not self.claim:
            raise ValueError("claim must be non-empty")
        if not self.explanation:
            raise ValueError("explanation must be non-empty")
        if self.publisher not in PUBLISHERS:
            raise ValueError(f"unknown publisher {self.publisher!r}")

    def to_row(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "claim": self.claim,
            "evidence_kind": self.evidence.kind,
            "article": self.evidence.article_text,
            "snippets": list(self.evidence.snippets) if self.evidence.snippets is not None else None,
            "verdict": self.verdict_text,
            "explanation": self.explanation,
            "publisher": self.publisher,
            "nominal_label": self.nominal_label,
        }

    @classmethod
    def from_row(cls, row: dict[str, Any]) -> "ClaimRecord":
        snippets = row.get("snippets")
        evidence = EvidenceBundle(
            kind=row["evidence_kind"],
            article_text=row.get("article"),
            snippets=tuple(snippets) if snippets is not None else None,
        )
        return cls(
            id=row["id"],
            claim=row["claim"],
            evidence=evidence,
            verdict_text=row.get("verdict") or "",
            explanation=row["explanation"],
            publisher=row["publisher"],
            nominal_label=row.get("nominal_label"),
        )


@dataclass
class DatasetSplit:
    train: list[ClaimRecord]
    test: list[ClaimRecord]
    seed: int

    def __post_init__(self):
        train_ids = {r.id for r in self.train}
        test_ids = {r.id for r in self.test}
        if train_ids & test_ids:
            raise ValueError(f"train/test overlap on ids: {sorted(train_ids & test_ids)[:5]}")


def write_records(path: str | Path, records: Iterable[ClaimRecord]) -> int:
    return write_jsonl(path, (r.to_row() for r in records))


def read_records(path: str | Path) -> list[ClaimRecord]:
    return [ClaimRecord.from_row(row) for row in read_jsonl(path)]
