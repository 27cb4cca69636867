"""Benchmark the fixed-point kernels: compiled extension vs pure python.

Run:  python benchmarks/bench_fixedpoint.py
The backend is whatever the current process imports; to time the other
one, rerun with TENSOR_RMT_PURE=1. Workloads mirror the hot paths: a
density grid near the real axis, a support-detection scan, and the
scalar solves the summary-statistics root search performs.
"""
import time

import numpy as np

from tensor_rmt import BACKEND, LimitParams, compute_summary_stats, density
from tensor_rmt._kernels import solve_grid


def timeit(label, fn, repeat=3):
    best = min(timed(fn) for _ in range(repeat))
    print(f"{label:<44s} {best * 1e3:9.2f} ms")
    return best


def timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    print(f"backend: {BACKEND}")
    params = LimitParams.from_dims(130, 80, 140, beta_t=2.0, beta_m=3.0)
    xi = np.linspace(-4.0, 4.0, 1200) + 1e-5j

    timeit("solve_grid, 1200 points, eps=1e-5 (adaptive)",
           lambda: solve_grid(xi, params.c1, params.c2, params.c3,
                              params.sigma_t2, params.sigma_m2,
                              params.gamma_coef, 0.0, True, 0.5, 1e-13,
                              10000))
    timeit("density, 600-point grid (fixed coupling)",
           lambda: density(params,
                           np.linspace(-4.0, 4.0, 600),
                           stats=compute_summary_stats(params)))

    def stats_cold():
        # bust the support cache so every run pays the full scan
        from tensor_rmt.theory import _support_cached
        _support_cached.cache_clear()
        lp = LimitParams.from_dims(40, 110, 90, beta_t=2.0, beta_m=2.5)
        compute_summary_stats(lp)

    timeit("summary stats incl. support scan", stats_cold)


if __name__ == "__main__":
    main()
