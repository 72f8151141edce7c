"""Pure-numpy fallback for the hot kernels.

Same signatures as the compiled extension ``ciasr._kernels``; selected by
``ciasr._backend`` when the extension is unavailable or disabled.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sp

# keep the outer-product temporaries under ~4M doubles
_BLOCK_ELEMS = 4_000_000


def _weighted_sum(bessel, u: np.ndarray, coeff: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.empty(y.shape)
    block = max(1, _BLOCK_ELEMS // max(1, u.size))
    for start in range(0, y.size, block):
        yb = y[start : start + block]
        out[start : start + block] = bessel(yb[:, None] * u[None, :]) @ coeff
    return out


def weighted_j0_sum(u, coeff, y):
    """out[i] = sum_k coeff[k] * J0(u[k] * y[i])."""
    return _weighted_sum(sp.j0, np.asarray(u), np.asarray(coeff), np.asarray(y))


def weighted_j1_sum(u, coeff, y):
    """out[i] = sum_k coeff[k] * J1(u[k] * y[i])."""
    return _weighted_sum(sp.j1, np.asarray(u), np.asarray(coeff), np.asarray(y))


def empirical_j0_moment(x: np.ndarray, a: float) -> float:
    """Mean of J0(a * x) over the sample."""
    return float(np.mean(sp.j0(a * x)))


def scan_first_nonpositive(x: np.ndarray, a_start: float, step: float, max_steps: int):
    """First grid point a_start + i*step (i >= 1) with mean J0(a x) <= 0.

    Returns (i, moment_before, moment_at); i = -1 with the last moment when
    no sign change occurs within max_steps.
    """
    x = np.asarray(x)
    prev = empirical_j0_moment(x, a_start)
    batch = 8
    chunk = max(1, _BLOCK_ELEMS // batch)
    i = 0
    while i < max_steps:
        m = min(batch, max_steps - i)
        a_vals = a_start + step * (np.arange(1, m + 1) + i)
        sums = np.zeros(m)
        for start in range(0, x.size, chunk):
            xc = x[start : start + chunk]
            sums += sp.j0(a_vals[:, None] * xc[None, :]).sum(axis=1)
        moments = sums / x.size
        hits = np.nonzero(moments <= 0.0)[0]
        if hits.size:
            k = int(hits[0])
            before = prev if k == 0 else float(moments[k - 1])
            return i + k + 1, before, float(moments[k])
        prev = float(moments[-1])
        i += m
    return -1, prev, prev
