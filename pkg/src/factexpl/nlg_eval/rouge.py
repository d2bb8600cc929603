"""From-scratch ROUGE-1/2/L with corpus aggregation.

Preprocessing: lowercase, Unicode punctuation stripped, whitespace split.
No stemming, so comparisons against numbers reported elsewhere may drift by
around a point. Any empty side scores 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..jsonl import read_jsonl
from ..textutil import simple_tokens
from . import kernels


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _to_ids(candidate_tokens: list[str], reference_tokens: list[str]) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict[str, int] = {}
    for tok in candidate_tokens:
        if tok not in vocab:
            vocab[tok] = len(vocab)
    for tok in reference_tokens:
        if tok not in vocab:
            vocab[tok] = len(vocab)
    c = np.array([vocab[t] for t in candidate_tokens], dtype=np.int64)
    r = np.array([vocab[t] for t in reference_tokens], dtype=np.int64)
    return c, r


def _ngram_overlap_generic(cand: list[str], ref: list[str], n: int) -> int:
    # Counter-based path for n-gram orders the packed kernel cannot encode.
    from collections import Counter

    cc = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
    rc = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
    return sum(min(count, rc[gram]) for gram, count in cc.items())


def rouge_n(candidate: str, reference: str, n: int = 1) -> float:
    """ROUGE-N F1 in [0, 1]: clipped n-gram multiset overlap.

    Precision = overlap / candidate n-grams, recall = overlap / reference
    n-grams. Returns 0 when either side has no n-grams.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cand = simple_tokens(candidate)
    ref = simple_tokens(reference)
    n_cand = len(cand) - n + 1
    n_ref = len(ref) - n + 1
    if n_cand <= 0 or n_ref <= 0:
        return 0.0
    if n <= kernels.MAX_PACKED_N:
        c_ids, r_ids = _to_ids(cand, ref)
        overlap = kernels.ngram_overlap_count(c_ids, r_ids, n)
    else:
        overlap = _ngram_overlap_generic(cand, ref, n)
    return _f1(overlap / n_cand, overlap / n_ref)


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F1 in [0, 1]: token-level longest common subsequence.

    Precision = LCS / |candidate|, recall = LCS / |reference|.
    """
    cand = simple_tokens(candidate)
    ref = simple_tokens(reference)
    if not cand or not ref:
        return 0.0
    c_ids, r_ids = _to_ids(cand, ref)
    lcs = kernels.lcs_length(c_ids, r_ids)
    return _f1(lcs / len(cand), lcs / len(ref))


def score_pair(candidate: str, reference: str) -> tuple[float, float, float]:
    """(ROUGE-1, ROUGE-2, ROUGE-L) F1 scores for one prediction/reference pair."""
    return (
        rouge_n(candidate, reference, 1),
        rouge_n(candidate, reference, 2),
        rouge_l(candidate, reference),
    )


@dataclass
class RougeScore:
    """Corpus-level ROUGE report: mean per-example F1 scaled by 100."""

    rouge1_f: float
    rouge2_f: float
    rougeL_f: float
    per_example: list[tuple[float, float, float]] = field(repr=False, default_factory=list)

    @property
    def n(self) -> int:
        return len(self.per_example)

    def to_report(self, per_example_path: str | None = None) -> dict:
        return {
            "rouge1": self.rouge1_f,
            "rouge2": self.rouge2_f,
            "rougeL": self.rougeL_f,
            "n": self.n,
            "per_example_path": per_example_path,
        }


def corpus_rouge_pairs(pairs: list[tuple[str, str]]) -> RougeScore:
    """Score (candidate, reference) pairs, keeping per-example triples."""
    if not pairs:
        raise ValueError("cannot score an empty prediction set")
    per_example = [score_pair(c, r) for c, r in pairs]
    arr = np.asarray(per_example, dtype=np.float64)
    means = arr.mean(axis=0) * 100.0
    return RougeScore(float(means[0]), float(means[1]), float(means[2]), per_example)


def corpus_rouge(predictions_file: str | Path) -> RougeScore:
    """Score a predictions JSONL file ({id, claim, prediction, reference} rows)."""
    pairs = [(row["prediction"], row["reference"]) for row in read_jsonl(predictions_file)]
    if not pairs:
        raise ValueError(f"no prediction rows in {predictions_file}")
    return corpus_rouge_pairs(pairs)


def write_report(score: RougeScore, out_path: str | Path, per_example_path: str | Path | None = None) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    recorded = None
    if per_example_path is not None:
        per_example_path = Path(per_example_path)
        with open(per_example_path, "w", encoding="utf-8") as fh:
            for r1, r2, rl in score.per_example:
                fh.write(json.dumps({"rouge1": r1, "rouge2": r2, "rougeL": rl}) + "\n")
        # keep the report relocatable (and its bytes stable across run dirs)
        recorded = str(per_example_path.name)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(score.to_report(recorded), fh, indent=2)
        fh.write("\n")
