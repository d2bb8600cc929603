"""Evaluation scores for the learned quality metrics: MCC for the binary
dimensions, MAE/MSE/Spearman for the quality regressor, plus the statistical
baselines they are compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats


def mcc(tp: float, tn: float, fp: float, fn: float) -> float:
    """Matthews correlation coefficient from confusion counts.

    Any zero factor in the denominator yields 0, which makes the majority
    baseline score exactly 0.
    """
    if min(tp, tn, fp, fn) < 0:
        raise ValueError("confusion counts must be non-negative")
    total = tp + tn + fp + fn
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def mcc_from_predictions(preds: list[bool], labels: list[bool]) -> float:
    if len(preds) != len(labels):
        raise ValueError("prediction/label length mismatch")
    tp = sum(1 for p, y in zip(preds, labels) if p and y)
    tn = sum(1 for p, y in zip(preds, labels) if not p and not y)
    fp = sum(1 for p, y in zip(preds, labels) if p and not y)
    fn = sum(1 for p, y in zip(preds, labels) if not p and y)
    return mcc(tp, tn, fp, fn)


@dataclass
class RegressionEval:
    mae: float
    mse: float
    spearman: float
    spearman_degenerate: bool = False


def regression_eval(preds: list[float], labels: list[float]) -> RegressionEval:
    """MAE, MSE and Spearman rank correlation.

    Constant predictions leave Spearman undefined; it is reported as 0 with
    the degeneracy flag set (matching the convention that an infinitesimal
    prediction jitter would give a value close to zero).
    """
    if len(preds) != len(labels):
        raise ValueError("prediction/label length mismatch")
    if len(preds) < 2:
        raise ValueError("need at least 2 examples")
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    mae = float(np.mean(np.abs(p - y)))
    mse = float(np.mean((p - y) ** 2))
    if np.all(p == p[0]) or np.all(y == y[0]):
        return RegressionEval(mae, mse, 0.0, spearman_degenerate=True)
    rho = float(_scipy_stats.spearmanr(p, y).statistic)
    return RegressionEval(mae, mse, rho)


def mean_baseline(train_labels: list[float], n_eval: int | None = None) -> list[float]:
    """Constant predictor emitting the mean training label."""
    if not train_labels:
        raise ValueError("no labels to average")
    mean = float(np.mean(np.asarray(train_labels, dtype=np.float64)))
    return [mean] * (n_eval if n_eval is not None else len(train_labels))


def majority_baseline(train_labels: list[bool], n_eval: int | None = None) -> list[bool]:
    """Constant predictor emitting the most frequent training class."""
    if not train_labels:
        raise ValueError("no labels to count")
    majority = sum(train_labels) * 2 >= len(train_labels)
    return [majority] * (n_eval if n_eval is not None else len(train_labels))
