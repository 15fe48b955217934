#!/usr/bin/env python3
"""Benchmark the compiled orbit-scan kernel against the pure-Python fallback.

Both backends are run on identical workloads (level scans of a rotation
orbit at several horizons) and their outputs are compared element-wise
before timing, so the speedup numbers are only reported for verified-equal
results.

Usage: python3 benchmarks/kernel_benchmark.py [--steps N] [--repeat R]
"""

import argparse
import os
import time
from fractions import Fraction

import numpy as np

from cylinder_lab import _backend
from cylinder_lab.certified import CertifiedReal
from cylinder_lab.cf import PeriodicSource
from cylinder_lab.dynamics import scan_orbit


def run_backend(pure: bool, alpha, x, n_steps: int):
    old = os.environ.get("CYLINDER_LAB_FORCE_PURE")
    os.environ["CYLINDER_LAB_FORCE_PURE"] = "1" if pure else "0"
    try:
        t0 = time.perf_counter()
        res = scan_orbit(alpha, x, n_steps, want_levels=True, want_balanced=True)
        elapsed = time.perf_counter() - t0
    finally:
        if old is None:
            os.environ.pop("CYLINDER_LAB_FORCE_PURE", None)
        else:
            os.environ["CYLINDER_LAB_FORCE_PURE"] = old
    return res, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if not _backend.have_extension():
        raise SystemExit("compiled extension not available; nothing to compare")

    alpha = CertifiedReal(PeriodicSource([], [1]))  # golden rotation
    x = Fraction(1, 3)

    print(f"{'steps':>10} {'compiled (s)':>13} {'pure (s)':>10} {'speedup':>8}")
    n = 10_000
    while n <= args.steps:
        res_c, _ = run_backend(False, alpha, x, n)
        res_p, _ = run_backend(True, alpha, x, n)
        assert np.array_equal(res_c["levels"], res_p["levels"]), "level mismatch"
        assert np.array_equal(res_c["balanced"], res_p["balanced"]), "balanced mismatch"
        t_c = min(run_backend(False, alpha, x, n)[1] for _ in range(args.repeat))
        t_p = min(run_backend(True, alpha, x, n)[1] for _ in range(args.repeat))
        print(f"{n:>10} {t_c:>13.4f} {t_p:>10.4f} {t_p / t_c:>7.1f}x")
        n *= 10
    print("outputs verified identical on every workload")


if __name__ == "__main__":
    main()
