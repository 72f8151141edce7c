# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: weighted Bessel reductions over quadrature grids and
the moment scan over large samples.

Mirrors the signatures of ``ciasr._kernels_py``; loops are serial and
accumulate in a fixed order, so results are deterministic for fixed inputs.
The Bessel evaluations come from the same cephes routines the fallback uses,
so the two backends agree to the last few ulps.
"""

import numpy as np

from scipy.special.cython_special cimport j0, j1


def weighted_j0_sum(object u, object coeff, object y):
    """out[i] = sum_k coeff[k] * J0(u[k] * y[i])."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    if uv.shape[0] != cv.shape[0]:
        raise ValueError("u and coeff must have equal length")
    out = np.empty(yv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k, n = yv.shape[0], m = uv.shape[0]
    cdef double acc, yi
    with nogil:
        for i in range(n):
            yi = yv[i]
            acc = 0.0
            for k in range(m):
                acc += cv[k] * j0(uv[k] * yi)
            ov[i] = acc
    return out


def weighted_j1_sum(object u, object coeff, object y):
    """out[i] = sum_k coeff[k] * J1(u[k] * y[i])."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(coeff, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    if uv.shape[0] != cv.shape[0]:
        raise ValueError("u and coeff must have equal length")
    out = np.empty(yv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k, n = yv.shape[0], m = uv.shape[0]
    cdef double acc, yi
    with nogil:
        for i in range(n):
            yi = yv[i]
            acc = 0.0
            for k in range(m):
                acc += cv[k] * j1(uv[k] * yi)
            ov[i] = acc
    return out


cdef double _moment(double[::1] xv, double a) nogil:
    cdef Py_ssize_t k, n = xv.shape[0]
    cdef double acc = 0.0
    for k in range(n):
        acc += j0(a * xv[k])
    return acc / n


def empirical_j0_moment(object x, double a):
    """Mean of J0(a * x) over the sample."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] == 0:
        raise ValueError("x must be non-empty")
    cdef double result
    with nogil:
        result = _moment(xv, a)
    return result


def scan_first_nonpositive(object x, double a_start, double step, long max_steps):
    """First grid point a_start + i*step (i >= 1) with mean J0(a x) <= 0.

    Returns (i, moment_before, moment_at); i = -1 with the last moment when
    no sign change occurs within max_steps.
    """
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    if xv.shape[0] == 0:
        raise ValueError("x must be non-empty")
    cdef double prev, m
    cdef long i, hit = -1
    with nogil:
        prev = _moment(xv, a_start) if a_start > 0.0 else 1.0
        m = prev
        for i in range(1, max_steps + 1):
            m = _moment(xv, a_start + step * i)
            if m <= 0.0:
                hit = i
                break
            prev = m
    if hit > 0:
        return hit, prev, m
    return -1, m, m
