"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times the two hot paths — the weighted Bessel reduction used by the
quadrature grids and the moment scan used by the estimator — on
representative problem sizes, and reports the speedup.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from ciasr import _kernels_py

try:
    from ciasr import _kernels
except ImportError:
    _kernels = None


def _time(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return

    rng = np.random.default_rng(0)

    print(f"{'kernel':<28}{'compiled':>12}{'pure':>12}{'speedup':>10}")
    cases = []

    # quadrature-grid reduction: ~5000 nodes x 2000 evaluation points
    u = np.sort(rng.random(5000)) * 60.0
    coeff = rng.normal(size=5000)
    y = np.sort(rng.random(2000)) * 20.0
    cases.append(("weighted_j0_sum 5000x2000", "weighted_j0_sum", (u, coeff, y)))
    cases.append(("weighted_j1_sum 5000x2000", "weighted_j1_sum", (u, coeff, y)))

    # estimator scan: 1e6-sample moment sweep over 200 grid points
    x = np.abs(rng.normal(80.0, 30.0, 1_000_000))
    cases.append(("scan 1e6 samples x200", "scan_first_nonpositive", (x, 0.0, 1e-4, 200)))
    cases.append(("moment 1e6 samples", "empirical_j0_moment", (x, 0.02)))

    for label, name, args in cases:
        t_c = _time(getattr(_kernels, name), *args)
        t_p = _time(getattr(_kernels_py, name), *args)
        print(f"{label:<28}{t_c:>11.4f}s{t_p:>11.4f}s{t_p / t_c:>9.2f}x")


if __name__ == "__main__":
    main()
