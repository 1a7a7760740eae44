"""Benchmark the BM25 accumulation kernel: compiled vs pure Python.

Builds a synthetic posting workload, runs both kernels over the same
arrays, verifies they agree bit for bit, and reports throughput.

Run: python3 benchmarks/bench_bm25.py [--docs N] [--terms T] [--repeat R]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from odqa._scoring_py import accumulate_term as accumulate_py

try:
    from odqa._scoring_cy import accumulate_term as accumulate_cy
except ImportError:
    accumulate_cy = None


def make_workload(n_docs: int, n_terms: int, seed: int = 5):
    rng = random.Random(seed)
    np_rng = np.random.default_rng(seed)
    norms = 0.9 * (0.6 + 0.4 * np_rng.uniform(0.2, 3.0, n_docs))
    postings = []
    for _ in range(n_terms):
        df = rng.randint(n_docs // 20, n_docs // 2)
        ordinals = np.sort(np_rng.choice(n_docs, size=df, replace=False)).astype(
            np.int32
        )
        tfs = np_rng.integers(1, 8, size=df).astype(np.int32)
        idf = rng.uniform(0.1, 5.0)
        postings.append((ordinals, tfs, idf))
    return norms, postings


def run(kernel, norms, postings, repeat: int) -> tuple[np.ndarray, float]:
    scores = np.zeros(len(norms))
    best = float("inf")
    for _ in range(repeat):
        scores[:] = 0.0
        t0 = time.perf_counter()
        for ordinals, tfs, idf in postings:
            kernel(scores, ordinals, tfs, norms, idf, 0.9)
        best = min(best, time.perf_counter() - t0)
    return scores, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=50_000)
    parser.add_argument("--terms", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    norms, postings = make_workload(args.docs, args.terms)
    n_postings = sum(len(p[0]) for p in postings)
    print(f"workload: {args.docs} docs, {args.terms} terms, {n_postings} postings")

    py_scores, py_time = run(accumulate_py, norms, postings, args.repeat)
    print(f"python kernel:  {py_time * 1e3:8.2f} ms  "
          f"({n_postings / py_time / 1e6:.2f} M postings/s)")

    if accumulate_cy is None:
        print("compiled kernel not built; skipping comparison")
        return 0

    cy_scores, cy_time = run(accumulate_cy, norms, postings, args.repeat)
    print(f"compiled kernel:{cy_time * 1e3:8.2f} ms  "
          f"({n_postings / cy_time / 1e6:.2f} M postings/s)")
    print(f"speedup: {py_time / cy_time:.1f}x")

    if not np.array_equal(py_scores, cy_scores):
        print("ERROR: kernels disagree")
        return 1
    print("kernels agree bit for bit")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
