"""Hot counting kernels behind the ROUGE scores.

Two implementations of each kernel: a numba ``@njit`` version and a pure
NumPy/Python fallback. Selection happens once at import via the
``FACTEXPL_NUMBA`` env flag (``0``/``false``/``off`` disables JIT); the
benchmark in ``benchmarks/bench_rouge.py`` compares both paths.

Token sequences arrive as int64 id arrays; n-grams with n <= 3 are packed
into single int64 keys so overlap counting is a sort + two-pointer walk.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENABLED = os.getenv("FACTEXPL_NUMBA", "1").strip().lower() not in {"0", "false", "off", "no"}

# Ids are dense per-call (built from a small shared vocab), so this base
# keeps 3-gram keys well inside int64.
_PACK_BASE = np.int64(1) << np.int64(20)
MAX_PACKED_N = 3


def _lcs_length_py(a: np.ndarray, b: np.ndarray) -> int:
    """Token-level LCS length via the classic O(n*m) rolling-row DP."""
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                cur[j + 1] = prev[j] + 1
            else:
                cur[j + 1] = max(prev[j + 1], cur[j])
        prev, cur = cur, prev
    return int(prev[m])


def _ngram_overlap_py(a_keys: np.ndarray, b_keys: np.ndarray) -> int:
    """Clipped multiset intersection size of two sorted key arrays."""
    i = j = hits = 0
    na, nb = a_keys.shape[0], b_keys.shape[0]
    while i < na and j < nb:
        if a_keys[i] == b_keys[j]:
            hits += 1
            i += 1
            j += 1
        elif a_keys[i] < b_keys[j]:
            i += 1
        else:
            j += 1
    return hits


if NUMBA_ENABLED:
    try:
        from numba import njit

        lcs_length = njit(cache=True)(_lcs_length_py)
        _ngram_overlap = njit(cache=True)(_ngram_overlap_py)
    except ImportError:
        NUMBA_ENABLED = False
        lcs_length = _lcs_length_py
        _ngram_overlap = _ngram_overlap_py
else:
    lcs_length = _lcs_length_py
    _ngram_overlap = _ngram_overlap_py


def pack_ngrams(ids: np.ndarray, n: int) -> np.ndarray:
    """Encode every n-gram of `ids` as one int64 key (requires n <= MAX_PACKED_N)."""
    count = ids.shape[0] - n + 1
    if count <= 0:
        return np.empty(0, dtype=np.int64)
    keys = ids[:count].astype(np.int64).copy()
    for k in range(1, n):
        keys = keys * _PACK_BASE + ids[k : k + count]
    return keys


def ngram_overlap_count(a_ids: np.ndarray, b_ids: np.ndarray, n: int) -> int:
    """Clipped n-gram multiset overlap between two token-id sequences."""
    a_keys = np.sort(pack_ngrams(a_ids, n))
    b_keys = np.sort(pack_ngrams(b_ids, n))
    if a_keys.shape[0] == 0 or b_keys.shape[0] == 0:
        return 0
    return int(_ngram_overlap(a_keys, b_keys))


def warmup() -> None:
    """Trigger JIT compilation outside of timed sections."""
    a = np.array([1, 2, 3], dtype=np.int64)
    b = np.array([1, 3], dtype=np.int64)
    lcs_length(a, b)
    ngram_overlap_count(a, b, 1)
