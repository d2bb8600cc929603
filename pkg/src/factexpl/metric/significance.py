"""Significance protocol for the learned metrics: each experiment is re-run
over fresh train/test splits, then per-dimension scores are tested with a
one-sample t-test against the baseline population mean of 0 (MCC) and a
paired two-sample t-test between model sizes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from scipy import stats as _scipy_stats

from ..nlg_eval.stats import paired_t_test

log = logging.getLogger(__name__)


@dataclass
class OneSampleTestResult:
    t_statistic: float
    p_value: float
    n: int
    degenerate: bool = False


def one_sample_t_test(values: list[float], popmean: float = 0.0, one_sided: bool = False) -> OneSampleTestResult:
    """One-sample t-test of `values` against a known population mean.

    Zero sample variance is reported via the degeneracy flag rather than
    raised: the protocol must survive degenerate reruns. In the degenerate
    case p = 1.0 when the mean equals `popmean`, else 0.0.
    """
    n = len(values)
    if n < 2:
        raise ValueError(f"need at least 2 values, got {n}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    if var == 0.0:
        return OneSampleTestResult(0.0, 1.0 if mean == popmean else 0.0, n, degenerate=True)
    t = (mean - popmean) / math.sqrt(var / n)
    sf = float(_scipy_stats.t.sf(abs(t), n - 1))
    p = sf if one_sided and t > 0 else (1.0 - sf if one_sided else 2.0 * sf)
    return OneSampleTestResult(t, min(p, 1.0), n)


@dataclass
class SignificanceReport:
    n_runs: int
    seeds: list[int]
    comparisons: list[dict[str, Any]] = field(default_factory=list)

    def to_report(self) -> dict[str, Any]:
        return {"n_runs": self.n_runs, "seeds": self.seeds, "comparisons": self.comparisons}


def significance_from_scores(
    scores_by_condition: dict[str, list[float]],
    seeds: list[int] | None = None,
) -> SignificanceReport:
    """Build the report from already-collected per-run scores.

    Each condition gets a one-sample test vs 0 (the baseline's known MCC);
    every pair of conditions gets a paired two-sample test. Degenerate
    variance is flagged in the comparison entry, never raised.
    """
    names = list(scores_by_condition)
    n_runs = len(next(iter(scores_by_condition.values())))
    for name, scores in scores_by_condition.items():
        if len(scores) != n_runs:
            raise ValueError(f"condition {name!r} has {len(scores)} runs, expected {n_runs}")
    report = SignificanceReport(n_runs=n_runs, seeds=seeds or list(range(1, n_runs + 1)))
    for name in names:
        res = one_sample_t_test(scores_by_condition[name], popmean=0.0)
        report.comparisons.append(
            {
                "kind": "one_sample_vs_0",
                "condition": name,
                "t": res.t_statistic,
                "p_value": res.p_value,
                "degenerate": res.degenerate,
            }
        )
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            entry: dict[str, Any] = {"kind": "paired_two_sample", "conditions": [a, b]}
            try:
                res2 = paired_t_test(scores_by_condition[a], scores_by_condition[b])
                entry.update(t=res2.t_statistic, p_value=res2.p_value, degenerate=False)
            except ValueError as exc:
                log.warning("paired test %s vs %s degenerate: %s", a, b, exc)
                entry.update(t=None, p_value=None, degenerate=True, reason=str(exc))
            report.comparisons.append(entry)
    return report


def significance_protocol(
    run_experiment: Callable[[str, str, int], float],
    dimensions: list[str],
    conditions: list[str],
    n_runs: int = 5,
) -> dict[str, SignificanceReport]:
    """Re-run each experiment `n_runs` times with fresh split seeds {1..n} and test.

    `run_experiment(dimension, condition, seed)` must train and evaluate one
    model on a split drawn with that seed and return its score. Returns one
    report per dimension.
    """
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")
    seeds = list(range(1, n_runs + 1))
    reports: dict[str, SignificanceReport] = {}
    for dim in dimensions:
        scores = {
            cond: [run_experiment(dim, cond, seed) for seed in seeds]
            for cond in conditions
        }
        reports[dim] = significance_from_scores(scores, seeds=seeds)
    return reports
