"""Benchmark the numba and numpy kernel lanes on the hot paths.

Usage: python benchmarks/bench_kernels.py [--count N] [--sites N] [--bond N]

Times the measurement-sampling sweep and the per-sample observable value
tables on a synthetic workload, prints one row per (kernel, lane), and
verifies that both lanes produce bit-identical results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from shadowtt.backend import have_numba
from shadowtt.mps import random_mps
from shadowtt.shadows import build_trace_table, sample_shadows
from shadowtt.sketch import estimate_moments, two_local_sketch_family


def timed(fn, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=50_000)
    parser.add_argument("--sites", type=int, default=10)
    parser.add_argument("--bond", type=int, default=16)
    args = parser.parse_args()

    lanes = ["numpy"] + (["numba"] if have_numba() else [])
    if len(lanes) == 1:
        print("numba not importable; benchmarking the numpy lane only")

    psi = random_mps(args.sites, args.bond, seed=0)
    family = two_local_sketch_family(args.sites)

    if "numba" in lanes:  # trigger jit compilation outside the timed region
        sample_shadows(psi, 1000, 1, seed=1, backend="numba")
        estimate_moments(
            build_trace_table(sample_shadows(psi, 1000, 1, seed=1, backend="numba")),
            family,
            backend="numba",
        )

    print(f"workload: {args.count} samples, {args.sites} sites, bond {args.bond}")
    print(f"{'kernel':<18} {'lane':<7} {'seconds':>9}")
    batches = {}
    for lane in lanes:
        seconds, batch = timed(
            lambda lane=lane: sample_shadows(psi, args.count, 1, seed=7, backend=lane)
        )
        batches[lane] = batch
        print(f"{'sample_shadows':<18} {lane:<7} {seconds:>9.3f}")
    table = build_trace_table(batches[lanes[0]])
    moments = {}
    for lane in lanes:
        seconds, m = timed(lambda lane=lane: estimate_moments(table, family, backend=lane))
        moments[lane] = m
        print(f"{'estimate_moments':<18} {lane:<7} {seconds:>9.3f}")

    if len(lanes) == 2:
        codes_equal = np.array_equal(batches["numpy"].codes, batches["numba"].codes)
        moment_equal = all(
            np.array_equal(x, y) for x, y in zip(moments["numpy"].z, moments["numba"].z)
        ) and all(np.array_equal(x, y) for x, y in zip(moments["numpy"].b, moments["numba"].b))
        print(f"lane agreement: sampled codes identical={codes_equal}, moments identical={moment_equal}")
        if not (codes_equal and moment_equal):
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
