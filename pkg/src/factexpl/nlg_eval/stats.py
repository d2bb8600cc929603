"""Paired significance test used to compare two generators example-by-example."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats as _scipy_stats


@dataclass
class PairedTestResult:
    t_statistic: float
    p_value: float
    n: int


def paired_t_test(
    scores_a: list[float],
    scores_b: list[float],
    one_sided: bool = False,
) -> PairedTestResult:
    """Paired t-test on per-example score differences.

    Two-sided by default; `one_sided` tests mean(a - b) > 0. All-zero
    differences (identical score vectors) give t = 0, p = 1. Constant
    nonzero differences have no variance to test against and raise.
    """
    if len(scores_a) != len(scores_b):
        raise ValueError(f"paired samples differ in length: {len(scores_a)} vs {len(scores_b)}")
    n = len(scores_a)
    if n < 2:
        raise ValueError(f"need at least 2 pairs, got {n}")
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return PairedTestResult(0.0, 1.0, n)
        raise ValueError("degenerate paired test: constant nonzero differences (zero variance)")
    t = mean / math.sqrt(var / n)
    sf = float(_scipy_stats.t.sf(abs(t), n - 1))
    p = sf if one_sided and t > 0 else (1.0 - sf if one_sided else 2.0 * sf)
    return PairedTestResult(t, min(p, 1.0), n)
