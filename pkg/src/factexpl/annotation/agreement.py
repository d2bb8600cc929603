"""Inter-annotator agreement as simple peer accuracy.

Each item is rated by its own small set of annotators, so chance-corrected
coefficients over a fixed rater panel do not apply; agreement is instead the
fraction of an annotator's peers giving the same answer, averaged over all
of their (summary, binary-dimension) cells. 0.5 is the expectation of a
random answering strategy. The overall-quality rating is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .judgments import BINARY_DIMENSIONS, JudgmentRecord, by_summary


@dataclass
class AgreementProfile:
    annotator_id: str
    overall_agreement: Optional[float]  # None when the annotator had no peer overlap
    per_question_agreement: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        vals = list(self.per_question_agreement.values())
        if self.overall_agreement is not None:
            vals.append(self.overall_agreement)
        for v in vals:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"agreement out of [0, 1]: {v}")


def compute_agreement(judgments: list[JudgmentRecord]) -> list[AgreementProfile]:
    """Peer-accuracy profile per annotator.

    A cell is one (summary, dimension) pair; its value for annotator A is
    the fraction of A's peers on that summary who gave A's answer. Overall
    agreement is the unweighted mean over A's cells; per-question agreement
    restricts the mean to one dimension. Annotators who never share a
    summary with a peer get overall_agreement None rather than 0.
    """
    cells: dict[str, dict[str, list[float]]] = {}
    for summary_judgments in by_summary(judgments).values():
        if len(summary_judgments) < 2:
            continue
        for me in summary_judgments:
            peers = [j for j in summary_judgments if j.annotator_id != me.annotator_id]
            if not peers:
                continue
            per_dim = cells.setdefault(me.annotator_id, {d: [] for d in BINARY_DIMENSIONS})
            for dim in BINARY_DIMENSIONS:
                mine = me.answer(dim)
                matches = sum(1 for p in peers if p.answer(dim) == mine)
                per_dim[dim].append(matches / len(peers))

    profiles = []
    for annotator_id in sorted({j.annotator_id for j in judgments}):
        per_dim = cells.get(annotator_id)
        if not per_dim or not any(per_dim.values()):
            profiles.append(AgreementProfile(annotator_id, overall_agreement=None))
            continue
        all_cells = [v for dim_cells in per_dim.values() for v in dim_cells]
        per_question = {
            dim: sum(vals) / len(vals) for dim, vals in per_dim.items() if vals
        }
        profiles.append(
            AgreementProfile(
                annotator_id,
                overall_agreement=sum(all_cells) / len(all_cells),
                per_question_agreement=per_question,
            )
        )
    return profiles


def perfect_partial_agreement(
    judgments: list[JudgmentRecord],
    expected_raters: int = 3,
) -> tuple[dict[str, tuple[float, float]], int]:
    """Per dimension: (perfect, partial) agreement fractions over summaries
    with exactly `expected_raters` judgments.

    Perfect means all raters agree; partial means a strict majority does.
    With 3 raters and binary answers a three-way split cannot occur, so the
    two fractions sum to 1. Summaries with a different judgment count are
    excluded; the count of exclusions is returned alongside.
    """
    groups = by_summary(judgments)
    eligible = {s: js for s, js in groups.items() if len(js) == expected_raters}
    excluded = len(groups) - len(eligible)
    table: dict[str, tuple[float, float]] = {}
    for dim in BINARY_DIMENSIONS:
        perfect = partial = 0
        for js in eligible.values():
            answers = [j.answer(dim) for j in js]
            agree_max = max(answers.count(True), answers.count(False))
            if agree_max == expected_raters:
                perfect += 1
            elif agree_max * 2 > expected_raters:
                partial += 1
        n = len(eligible)
        table[dim] = (perfect / n, partial / n) if n else (0.0, 0.0)
    return table, excluded


@dataclass
class FilterResult:
    judgments: list[JudgmentRecord]
    judgments_removed: int
    summaries_dropped: int
    # per_question mode only: which dimensions each kept annotator passed on
    annotator_dimensions: Optional[dict[str, set[str]]] = None


def filter_annotators(
    judgments: list[JudgmentRecord],
    profiles: list[AgreementProfile],
    threshold: float,
    mode: str = "overall",
) -> FilterResult:
    """Keep judgments from annotators whose agreement is strictly above the
    threshold.

    `mode="overall"` filters whole annotators; `mode="per_question"` keeps
    annotators with at least one passing dimension and records which
    dimensions passed (aggregation consults that map). Summaries left
    without any judgment are dropped and counted.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if mode not in ("overall", "per_question"):
        raise ValueError(f"unknown filter mode {mode!r}")
    by_id = {p.annotator_id: p for p in profiles}

    annotator_dimensions: Optional[dict[str, set[str]]] = None
    if mode == "overall":
        keep_ids = {
            p.annotator_id
            for p in profiles
            if p.overall_agreement is not None and p.overall_agreement > threshold
        }
    else:
        annotator_dimensions = {}
        for p in profiles:
            passing = {dim for dim, value in p.per_question_agreement.items() if value > threshold}
            if passing:
                annotator_dimensions[p.annotator_id] = passing
        keep_ids = set(annotator_dimensions)

    kept = [j for j in judgments if j.annotator_id in keep_ids and j.annotator_id in by_id]
    summaries_before = {j.summary_id for j in judgments}
    summaries_after = {j.summary_id for j in kept}
    return FilterResult(
        judgments=kept,
        judgments_removed=len(judgments) - len(kept),
        summaries_dropped=len(summaries_before - summaries_after),
        annotator_dimensions=annotator_dimensions,
    )
