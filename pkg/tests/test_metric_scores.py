"""MCC against a Pearson-correlation oracle; regression metrics and baselines."""

from __future__ import annotations

import random
import time

import numpy as np
import pytest

from factexpl.metric.scores import (
    majority_baseline,
    mcc,
    mcc_from_predictions,
    mean_baseline,
    regression_eval,
)


def pearson_mcc_oracle(tp: int, tn: int, fp: int, fn: int) -> float:
    """MCC as the Pearson correlation of the underlying binary vectors."""
    y_true = [1] * tp + [1] * fn + [0] * fp + [0] * tn
    y_pred = [1] * tp + [0] * fn + [1] * fp + [0] * tn
    a, b = np.asarray(y_true, dtype=float), np.asarray(y_pred, dtype=float)
    if a.std() == 0 or b.std() == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def test_mcc_matches_pearson_oracle_on_500_matrices():
    rng = random.Random(2024)
    start = time.monotonic()
    checked = 0
    for _ in range(500):
        tp, tn, fp, fn = (rng.randint(0, 30) for _ in range(4))
        if tp + tn + fp + fn == 0:
            tp = 1
        assert mcc(tp, tn, fp, fn) == pytest.approx(pearson_mcc_oracle(tp, tn, fp, fn), abs=1e-9)
        checked += 1
    assert checked == 500
    assert time.monotonic() - start < 5.0


def test_mcc_hand_value():
    assert mcc(1, 2, 1, 0) == pytest.approx(2 / np.sqrt(12), abs=1e-9)


def test_mcc_perfect_predictor():
    assert mcc(10, 5, 0, 0) == 1.0


def test_mcc_zero_factor_convention():
    # all-majority predictor: no predicted positives -> zero factor -> 0
    assert mcc(0, 20, 0, 5) == 0.0
    assert mcc(5, 0, 20, 0) == 0.0


def test_mcc_complement_invariance():
    rng = random.Random(7)
    for _ in range(100):
        tp, tn, fp, fn = (rng.randint(0, 25) for _ in range(4))
        if tp + tn + fp + fn == 0:
            tn = 3
        assert mcc(tp, tn, fp, fn) == pytest.approx(mcc(tn, tp, fn, fp), abs=1e-12)


def test_mcc_rejects_bad_counts():
    with pytest.raises(ValueError):
        mcc(-1, 1, 1, 1)
    with pytest.raises(ValueError):
        mcc(0, 0, 0, 0)


def test_mcc_from_predictions():
    preds = [True, False, True, True]
    labels = [True, False, False, True]
    # tp=2 tn=1 fp=1 fn=0
    assert mcc_from_predictions(preds, labels) == pytest.approx(mcc(2, 1, 1, 0))


# --- regression ---------------------------------------------------------------


def test_regression_eval_exact_predictions():
    res = regression_eval([0.1, 0.5, 0.9], [0.1, 0.5, 0.9])
    assert res.mae == 0.0
    assert res.mse == 0.0
    assert res.spearman == pytest.approx(1.0)
    assert not res.spearman_degenerate


def test_regression_eval_hand_values():
    res = regression_eval([0.2, 0.4], [0.4, 0.2])
    assert res.mae == pytest.approx(0.2)
    assert res.mse == pytest.approx(0.04)
    assert res.spearman == pytest.approx(-1.0)


def test_constant_predictions_flag_degenerate_spearman():
    res = regression_eval([0.5, 0.5, 0.5], [0.1, 0.4, 0.9])
    assert res.spearman == 0.0
    assert res.spearman_degenerate


def test_spearman_invariant_under_monotone_transform():
    rng = random.Random(3)
    preds = [rng.uniform(0, 1) for _ in range(50)]
    labels = [rng.uniform(0, 1) for _ in range(50)]
    base = regression_eval(preds, labels).spearman
    squashed = regression_eval([p**3 + 2 for p in preds], labels).spearman
    assert squashed == pytest.approx(base, abs=1e-12)


# --- baselines -------------------------------------------------------------------


def test_mean_baseline_mae_equals_mean_absolute_deviation():
    rng = random.Random(11)
    for _ in range(20):
        labels = [rng.uniform(0, 1) for _ in range(rng.randint(3, 60))]
        preds = mean_baseline(labels)
        res = regression_eval(preds, labels)
        mad = float(np.mean(np.abs(np.asarray(labels) - np.mean(labels))))
        assert res.mae == pytest.approx(mad, abs=1e-12)
        assert res.spearman_degenerate


def test_no_constant_predictor_beats_mean_on_mse():
    rng = random.Random(12)
    labels = [rng.uniform(0, 1) for _ in range(40)]
    mean_mse = regression_eval(mean_baseline(labels), labels).mse
    for constant in (0.0, 0.25, 0.49, 0.51, 0.75, 1.0):
        mse = regression_eval([constant] * len(labels), labels).mse
        assert mse >= mean_mse - 1e-12


def test_majority_baseline_scores_zero_mcc():
    labels = [True] * 15 + [False] * 5
    preds = majority_baseline(labels)
    assert preds == [True] * 20
    assert mcc_from_predictions(preds, labels) == 0.0


def test_paper_reference_metric_values_recorded():
    # Paper-scale reference values for the largest encoder metric models
    # (not desk-reproducible): MCC per objective dimension and regression
    # metrics with their baseline.
    XXLARGE_MCC = {"article_contradiction": 0.720, "self_contradiction": 0.756, "hallucination": 0.706}
    REGRESSION = {"mae": 0.1162, "mse": 0.022, "spearman": 0.302}
    BASELINE = {"mae": 0.118, "mse": 0.022, "spearman": 0.0}
    assert all(-1 <= v <= 1 for v in XXLARGE_MCC.values())
    assert BASELINE["spearman"] == 0.0 and REGRESSION["mae"] < BASELINE["mae"]
