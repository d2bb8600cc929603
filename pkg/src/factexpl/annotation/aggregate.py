"""Aggregation of filtered judgments into per-summary training labels, and
export of the metric-learning dataset."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..jsonl import write_jsonl
from .adjudicator import AdjudicationError, Adjudicator, SummaryBundle
from .judgments import BINARY_DIMENSIONS, OBJECTIVE_DIMENSIONS, JudgmentRecord, by_summary

log = logging.getLogger(__name__)


@dataclass
class AggregatedLabel:
    summary_id: str
    binary_labels: dict[str, bool]  # only dimensions that resolved
    quality_score: float
    tie_broken_by_adjudicator: set[str] = field(default_factory=set)

    def __post_init__(self):
        extra = self.tie_broken_by_adjudicator - set(OBJECTIVE_DIMENSIONS)
        if extra:
            raise ValueError(f"adjudicator provenance on non-objective dimensions: {sorted(extra)}")

    def to_row(self) -> dict[str, Any]:
        return {
            "summary_id": self.summary_id,
            "labels": {d: self.binary_labels[d] for d in BINARY_DIMENSIONS if d in self.binary_labels},
            "quality": self.quality_score,
            "tie_broken_by_adjudicator": sorted(self.tie_broken_by_adjudicator),
        }


@dataclass
class AggregationStats:
    summaries: int = 0
    adjudicated: int = 0
    unresolved_by_dimension: dict[str, int] = field(default_factory=dict)

    def unresolved(self, dimension: str):
        self.unresolved_by_dimension[dimension] = self.unresolved_by_dimension.get(dimension, 0) + 1


def aggregate(
    judgments: list[JudgmentRecord],
    adjudicator: Optional[Adjudicator] = None,
    summaries: Optional[dict[str, SummaryBundle]] = None,
    annotator_dimensions: Optional[dict[str, set[str]]] = None,
) -> tuple[list[AggregatedLabel], AggregationStats]:
    """Majority-vote the binary dimensions and average the quality ratings.

    Exact 1-1 ties go to the adjudicator on objective dimensions (which
    needs the summary texts); subjective ties and failed adjudications
    leave that dimension out of the summary's labels, with a count.
    Judgment order never affects the result.
    """
    stats = AggregationStats()
    labels: list[AggregatedLabel] = []
    grouped = by_summary(judgments)
    for summary_id in sorted(grouped):
        group = grouped[summary_id]
        binary: dict[str, bool] = {}
        provenance: set[str] = set()
        for dim in BINARY_DIMENSIONS:
            votes = [
                j.answer(dim)
                for j in group
                if annotator_dimensions is None or dim in annotator_dimensions.get(j.annotator_id, set())
            ]
            if not votes:
                stats.unresolved(dim)
                continue
            yes, no = votes.count(True), votes.count(False)
            if yes != no:
                binary[dim] = yes > no
                continue
            # exact tie
            if dim in OBJECTIVE_DIMENSIONS and len(votes) == 2 and adjudicator is not None:
                bundle = (summaries or {}).get(summary_id)
                if bundle is None:
                    log.warning("no summary texts for %s; cannot adjudicate %s", summary_id, dim)
                    stats.unresolved(dim)
                    continue
                try:
                    binary[dim] = adjudicator.adjudicate_tie(bundle, dim)
                    provenance.add(dim)
                    stats.adjudicated += 1
                except AdjudicationError as exc:
                    log.warning("tie on %s/%s stands: %s", summary_id, dim, exc)
                    stats.unresolved(dim)
            else:
                stats.unresolved(dim)
        quality_votes = [j.overall_quality for j in group]
        labels.append(
            AggregatedLabel(
                summary_id=summary_id,
                binary_labels=binary,
                quality_score=sum(quality_votes) / len(quality_votes),
                tie_broken_by_adjudicator=provenance,
            )
        )
        stats.summaries += 1
    return labels, stats


def metric_input_text(bundle: SummaryBundle) -> str:
    """Metric-model input: claim, gold verdict and generated explanation
    joined by newlines."""
    return "\n".join([bundle.claim, bundle.verdict, bundle.explanation])


def export_metric_dataset(
    labels: list[AggregatedLabel],
    summaries: dict[str, SummaryBundle],
    split_sizes: tuple[int, int],
    seed: int,
    out_dir: str | Path,
) -> tuple[Path, Path]:
    """Write train/eval JSONL files of {summary_id, text, labels, quality}.

    The split is a seed-deterministic shuffle cut to the requested sizes.
    """
    n_train, n_eval = split_sizes
    if len(labels) < n_train + n_eval:
        raise ValueError(
            f"need {n_train}+{n_eval}={n_train + n_eval} labelled summaries, have {len(labels)}"
        )
    missing = [lbl.summary_id for lbl in labels if lbl.summary_id not in summaries]
    if missing:
        raise ValueError(f"no summary texts for {len(missing)} labels (first: {missing[:3]})")

    order = sorted(labels, key=lambda lbl: lbl.summary_id)
    random.Random(seed).shuffle(order)

    def rows(chunk: list[AggregatedLabel]):
        for lbl in chunk:
            yield {
                "summary_id": lbl.summary_id,
                "text": metric_input_text(summaries[lbl.summary_id]),
                "labels": {d: lbl.binary_labels[d] for d in BINARY_DIMENSIONS if d in lbl.binary_labels},
                "quality": lbl.quality_score,
            }

    out_dir = Path(out_dir)
    train_path, eval_path = out_dir / "metric_train.jsonl", out_dir / "metric_eval.jsonl"
    write_jsonl(train_path, rows(order[:n_train]))
    write_jsonl(eval_path, rows(order[n_train : n_train + n_eval]))
    return train_path, eval_path
