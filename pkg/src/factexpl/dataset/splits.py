"""Deterministic train/test splitting and publisher ablation subsets."""

from __future__ import annotations

import random

from .records import PUBLISHERS, ClaimRecord, DatasetSplit

DEFAULT_SEED = 13


def split_dataset(records: list[ClaimRecord], ratio: float, seed: int = DEFAULT_SEED) -> DatasetSplit:
    """Shuffle with the seed and cut floor(N * ratio) records into train.

    N=14121 at ratio 0.8 gives the canonical 11296/2825 sizes.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = len(records)
    if n < 2:
        raise ValueError(f"need at least 2 records to split, got {n}")
    order = list(records)
    random.Random(seed).shuffle(order)
    n_train = int(n * ratio)
    return DatasetSplit(train=order[:n_train], test=order[n_train:], seed=seed)


def subset(records: list[ClaimRecord], publisher: str) -> list[ClaimRecord]:
    """Records from one publisher, original order preserved."""
    if publisher not in PUBLISHERS:
        raise ValueError(f"unknown publisher {publisher!r}")
    return [r for r in records if r.publisher == publisher]
