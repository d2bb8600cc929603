"""Benchmark the ROUGE hot kernels: numba @njit vs the pure-Python fallback.

The kernel path is frozen at import time via FACTEXPL_NUMBA, so each mode
runs in a subprocess. Usage:

    python benchmarks/bench_rouge.py            # compare both paths
    python benchmarks/bench_rouge.py --inner    # (internal) time one path
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time


def make_corpus(n_pairs: int, length: int, seed: int = 7) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    vocab = [f"tok{i}" for i in range(200)]
    pairs = []
    for _ in range(n_pairs):
        cand = " ".join(rng.choice(vocab) for _ in range(length))
        ref = " ".join(rng.choice(vocab) for _ in range(length))
        pairs.append((cand, ref))
    return pairs


def time_corpus(pairs: list[tuple[str, str]], repeats: int = 3) -> dict:
    from factexpl.nlg_eval import kernels
    from factexpl.nlg_eval.rouge import corpus_rouge_pairs

    kernels.warmup()  # pull JIT compilation out of the timed region
    best = float("inf")
    score = None
    for _ in range(repeats):
        start = time.perf_counter()
        score = corpus_rouge_pairs(pairs)
        best = min(best, time.perf_counter() - start)
    return {
        "numba": kernels.NUMBA_ENABLED,
        "seconds": best,
        "rouge1": score.rouge1_f,
        "rouge2": score.rouge2_f,
        "rougeL": score.rougeL_f,
    }


def run_mode(numba_on: bool, n_pairs: int, length: int) -> dict:
    env = dict(os.environ, FACTEXPL_NUMBA="1" if numba_on else "0")
    out = subprocess.run(
        [sys.executable, __file__, "--inner", "--pairs", str(n_pairs), "--length", str(length)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--inner", action="store_true")
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--length", type=int, default=80)
    args = parser.parse_args()

    if args.inner:
        result = time_corpus(make_corpus(args.pairs, args.length))
        print(json.dumps(result))
        return

    print(f"corpus: {args.pairs} pairs, ~{args.length} tokens per side\n")
    jit = run_mode(True, args.pairs, args.length)
    plain = run_mode(False, args.pairs, args.length)
    assert abs(jit["rouge1"] - plain["rouge1"]) < 1e-9, "paths disagree on scores"
    assert abs(jit["rougeL"] - plain["rougeL"]) < 1e-9, "paths disagree on scores"
    print(f"{'path':<16}{'seconds':>10}{'pairs/s':>12}")
    for label, result in (("numba @njit", jit), ("pure fallback", plain)):
        rate = args.pairs / result["seconds"]
        print(f"{label:<16}{result['seconds']:>10.3f}{rate:>12.0f}")
    print(f"\nspeedup: {plain['seconds'] / jit['seconds']:.1f}x  "
          f"(identical scores: R1={jit['rouge1']:.3f} RL={jit['rougeL']:.3f})")


if __name__ == "__main__":
    main()
