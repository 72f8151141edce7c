"""Bessel functions, Bessel zeros and the damped oscillatory quadrature core.

Everything downstream (density evaluation, moment matching, metrics) sits on
top of the three kernels in this module:

* scalar/vector Bessel evaluations ``bessel_j0``/``bessel_j1``/``bessel_i0``,
* the zero table ``j0_zero``,
* ``integrate_damped_bessel`` for integrals of the form
  ``int_0^inf  damping(w) * oscillatory(w) dw`` where the damping factor is
  ``exp(-g^a * w^a)``-like and the oscillation comes from J0/J1 factors.

The quadrature strategy is zero partitioning: the half line is split at the
consecutive zeros of the fastest-oscillating Bessel factor and each segment is
integrated with fixed-order Gauss-Legendre.  Segments decay with the damping
factor, so plain summation with a cutoff is stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sp

from .exceptions import ConvergenceError, DomainError

# Largest |x| for which exp(|x|) * i0e(x) stays inside double range.
I0_OVERFLOW_BOUND = 700.0

#: First positive zero of J0 ("the 2.405 constant" of the delta scan).
J0_FIRST_ZERO = 2.404825557695773

_GL_ORDER = 24
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the damped oscillatory quadrature.

    relative_tolerance: requested relative accuracy of the integral value.
    max_segments: hard cap on the number of inter-zero segments.
    tail_cutoff_epsilon: truncate once the damping factor (equivalently the
        segment magnitude relative to the peak segment) falls below this.
    """

    relative_tolerance: float = 1e-8
    max_segments: int = 10_000
    tail_cutoff_epsilon: float = 1e-14

    def __post_init__(self):
        if not (self.relative_tolerance > 0):
            raise DomainError("relative_tolerance must be > 0")
        if not (self.tail_cutoff_epsilon > 0):
            raise DomainError("tail_cutoff_epsilon must be > 0")
        if self.max_segments < 1:
            raise DomainError("max_segments must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def _check_finite(x, name: str):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")


def bessel_j0(x):
    """J0(x) for finite real (scalar or array) arguments."""
    _check_finite(x, "x")
    return sp.j0(x)


def bessel_j1(x):
    """J1(x) for finite real (scalar or array) arguments."""
    _check_finite(x, "x")
    return sp.j1(x)


def bessel_i0(x):
    """I0(x), evaluated through the exponentially scaled variant.

    Raises OverflowError once |x| exceeds ``I0_OVERFLOW_BOUND`` where the
    rescaled product would leave double range.
    """
    _check_finite(x, "x")
    xa = np.abs(np.asarray(x, dtype=float))
    if np.any(xa > I0_OVERFLOW_BOUND):
        raise OverflowError(
            f"bessel_i0 argument magnitude exceeds overflow bound {I0_OVERFLOW_BOUND}"
        )
    out = sp.i0e(xa) * np.exp(xa)
    return float(out) if np.isscalar(x) else out


_ZERO_TABLE = sp.jn_zeros(0, 128)


def _j0_zeros(n: int) -> np.ndarray:
    """First n positive zeros of J0 (cached, grows on demand)."""
    global _ZERO_TABLE
    if n > _ZERO_TABLE.size:
        _ZERO_TABLE = sp.jn_zeros(0, max(n, 2 * _ZERO_TABLE.size))
    return _ZERO_TABLE[:n]


def j0_zero(k: int) -> float:
    """k-th positive zero of J0 (k >= 1)."""
    if k < 1:
        raise DomainError("zero index k must be >= 1")
    return float(_j0_zeros(k)[k - 1])


def _segment_edges(n_segments: int, scale: float) -> np.ndarray:
    """Edges 0, z1/scale, ..., zn/scale of the zero partition."""
    zeros = _j0_zeros(n_segments)
    return np.concatenate(([0.0], zeros / scale))


# Geometric grading of the first segment toward 0: damping factors of the
# form exp(-(g*w)^a) have an algebraic cusp at w = 0 for non-integer a, which
# plain fixed-order quadrature on [0, z1] resolves only to ~1e-10.
_GRADE_LEVELS = 48


def _grade_first_edge(edges: np.ndarray) -> np.ndarray:
    first = edges[1]
    sub = first * 0.5 ** np.arange(_GRADE_LEVELS, 0, -1)
    return np.concatenate(([0.0], sub, edges[1:]))


def segment_nodes(upper: float, scale: float, spec: QuadratureSpec):
    """Gauss-Legendre nodes/weights for the zero partition of [0, upper].

    ``scale`` is the argument multiplier of the fastest oscillating Bessel
    factor; segments end at consecutive zeros of J0(scale * w).  Returns flat
    (nodes, weights) arrays.  Raises ConvergenceError when the partition would
    need more than ``spec.max_segments`` segments.
    """
    if upper <= 0:
        raise DomainError("upper must be > 0")
    scale = max(scale, 1e-300)
    # j0 zeros are ~ pi apart, so this slightly overestimates the need.
    n_est = int(np.ceil(upper * scale / np.pi)) + 2
    if n_est > spec.max_segments:
        raise ConvergenceError(
            f"zero partition needs ~{n_est} segments > max_segments={spec.max_segments}",
            work=n_est,
        )
    edges = _segment_edges(n_est, scale)
    edges = edges[edges < upper]
    edges = np.concatenate((edges, [upper]))
    edges = _grade_first_edge(edges)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def integrate_damped_bessel(
    integrand: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    osc_scale: float = 1.0,
) -> float:
    """Integrate a damped oscillatory integrand over [0, inf).

    ``integrand`` must accept a numpy array of abscissae and is expected to be
    a product of an exponentially decaying damping factor and bounded
    oscillatory terms.  ``osc_scale`` is the argument multiplier of the
    fastest oscillating factor (segments are placed at the zeros of
    J0(osc_scale * w)).

    Deterministic for fixed inputs.  Raises ConvergenceError (carrying the
    partial sum and the segment count) when the series of segment integrals
    has not fallen under the cutoff within ``spec.max_segments`` segments.
    """
    osc_scale = max(float(osc_scale), 1e-300)
    edges = _segment_edges(1, osc_scale)
    total = 0.0
    peak = 0.0
    quiet = 0
    k = 0
    block = 64
    while k < spec.max_segments:
        n_have = int(edges.size) - 1
        if k + 1 > n_have:
            edges = _segment_edges(n_have + block, osc_scale)
        lo, hi = edges[k], edges[k + 1]
        if k == 0:
            # graded toward 0: damping factors may have a cusp at the origin
            sub = _grade_first_edge(np.array([0.0, hi]))
            half_s = 0.5 * (sub[1:] - sub[:-1])
            mid_s = 0.5 * (sub[1:] + sub[:-1])
            u = (mid_s[:, None] + half_s[:, None] * _GL_NODES[None, :]).ravel()
            w = (half_s[:, None] * _GL_WEIGHTS[None, :]).ravel()
            term = float(np.dot(w, integrand(u)))
        else:
            half = 0.5 * (hi - lo)
            u = 0.5 * (hi + lo) + half * _GL_NODES
            term = half * float(np.dot(_GL_WEIGHTS, integrand(u)))
        total += term
        peak = max(peak, abs(term))
        k += 1
        cutoff = max(
            spec.tail_cutoff_epsilon * peak,
            0.1 * spec.relative_tolerance * abs(total),
        )
        if abs(term) <= cutoff:
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise ConvergenceError(
        f"damped Bessel quadrature did not settle within {spec.max_segments} segments",
        partial=total,
        work=k,
    )
