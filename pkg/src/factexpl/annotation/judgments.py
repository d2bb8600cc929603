"""Judgment records: one annotator's five-dimension rating of one generated
explanation.

Four binary dimensions plus a normalized overall-quality rating. The first
three binary dimensions are objective (verifiable against the evidence);
convincingness and overall quality are subjective preference judgments.
JSONL rows use the stable short keys q1..q4 / quality / ts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from ..jsonl import read_jsonl, write_jsonl

BINARY_DIMENSIONS = ("article_contradiction", "self_contradiction", "hallucination", "convincingness")
OBJECTIVE_DIMENSIONS = ("article_contradiction", "self_contradiction", "hallucination")
SUBJECTIVE_DIMENSIONS = ("convincingness",)

_Q_KEYS = {"article_contradiction": "q1", "self_contradiction": "q2", "hallucination": "q3", "convincingness": "q4"}


@dataclass(frozen=True)
class JudgmentRecord:
    summary_id: str
    annotator_id: str
    article_contradiction: bool
    self_contradiction: bool
    hallucination: bool
    convincingness: bool
    overall_quality: float
    timestamp: str = ""

    def __post_init__(self):
        if not 0.0 <= self.overall_quality <= 1.0:
            raise ValueError(f"overall_quality must be in [0, 1], got {self.overall_quality}")

    def answer(self, dimension: str) -> bool:
        if dimension not in BINARY_DIMENSIONS:
            raise KeyError(f"unknown binary dimension {dimension!r}")
        return bool(getattr(self, dimension))

    def to_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {"summary_id": self.summary_id, "annotator_id": self.annotator_id}
        for dim, key in _Q_KEYS.items():
            row[key] = bool(getattr(self, dim))
        row["quality"] = self.overall_quality
        row["ts"] = self.timestamp
        return row

    @classmethod
    def from_row(cls, row: dict[str, Any]) -> "JudgmentRecord":
        return cls(
            summary_id=row["summary_id"],
            annotator_id=row["annotator_id"],
            article_contradiction=bool(row["q1"]),
            self_contradiction=bool(row["q2"]),
            hallucination=bool(row["q3"]),
            convincingness=bool(row["q4"]),
            overall_quality=float(row["quality"]),
            timestamp=row.get("ts", ""),
        )


def write_judgments(path: str | Path, judgments: Iterable[JudgmentRecord]) -> int:
    return write_jsonl(path, (j.to_row() for j in judgments))


def read_judgments(path: str | Path) -> list[JudgmentRecord]:
    return [JudgmentRecord.from_row(row) for row in read_jsonl(path)]


def by_summary(judgments: Iterable[JudgmentRecord]) -> dict[str, list[JudgmentRecord]]:
    grouped: dict[str, list[JudgmentRecord]] = {}
    for j in judgments:
        grouped.setdefault(j.summary_id, []).append(j)
    return grouped
