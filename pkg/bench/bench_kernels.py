#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure NumPy fallback.

Times the four hot kernels on representative problem sizes and prints a
speedup table. Run from the repository root:

    python3 bench/bench_kernels.py [--sources N] [--targets M] [--repeat K]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pux2d._kernels import reference  # noqa: E402

try:
    from pux2d._kernels import _core as core
except ImportError:
    core = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sources", type=int, default=1728)
    parser.add_argument("--targets", type=int, default=100_000)
    parser.add_argument("--dd-order", type=int, default=213)
    parser.add_argument("--dd-rhs", type=int, default=8945)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if core is None:
        print("compiled core not available; build it with: python3 setup.py build_ext --inplace")
        return 1

    rng = np.random.default_rng(42)
    n, m = args.sources, args.targets
    src = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    wt = (0.01 + 0.001j) * rng.standard_normal(n)
    dens = rng.standard_normal(n)
    tgt = 0.7 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))

    poly = np.exp(1j * np.linspace(0, 0.2, 65)) + 0.001 * rng.standard_normal(65)
    near_tgt = 1.0 + 0.05 * (rng.standard_normal(2000) + 1j * rng.standard_normal(2000))
    zt = 0.9 * np.exp(1j * rng.uniform(0, 2 * np.pi, 2000))
    p0 = np.log((1 - zt) / (-1 - zt))

    k = args.dd_order
    lh = np.tril(rng.standard_normal((k, k)), -1) + np.eye(k)
    ll = 1e-17 * np.tril(rng.standard_normal((k, k)), -1)
    bh = rng.standard_normal((k, args.dd_rhs))
    bl = np.zeros_like(bh)
    nodes = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    pts = rng.standard_normal(2048) + 1j * rng.standard_normal(2048)

    cases = [
        (f"dlp_sum {n}x{m}",
         lambda impl: impl.dlp_sum(src, wt, dens, tgt)),
        (f"winding_angle 65x{near_tgt.shape[0]}",
         lambda impl: impl.winding_angle(poly, near_tgt)),
        ("moments_near 16x2000",
         lambda impl: impl.moments_near(zt, p0, 16)),
        ("moments_far 16x2000",
         lambda impl: impl.moments_far(zt * 4 + 6.0, 16)),
        (f"dd_tri_solve_lower {k}x{args.dd_rhs}",
         lambda impl: impl.dd_tri_solve_lower(lh, ll, bh, bl)),
        (f"dd_gaussian_matrix 2048x{k}",
         lambda impl: impl.dd_gaussian_matrix(2.0, pts, nodes)),
    ]

    print(f"{'kernel':36s} {'numpy [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for name, fn in cases:
        t_ref = timeit(lambda: fn(reference), args.repeat)
        t_core = timeit(lambda: fn(core), args.repeat)
        print(f"{name:36s} {t_ref:12.4f} {t_core:12.4f} {t_ref / t_core:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
