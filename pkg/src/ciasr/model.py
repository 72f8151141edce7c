"""Density and distribution function of the isotropic stable amplitude model.

The density is the Hankel-type integral

    f(x) = x * int_0^inf  w exp(-(gamma*w)^alpha) J0(w*delta) J0(w*x) dw

and the distribution function follows from the term-by-term identity
``int_0^x t J0(w t) dt = x J1(w x) / w``:

    F(x) = x * int_0^inf  exp(-(gamma*w)^alpha) J0(w*delta) J1(w*x) dw.

Both are evaluated in the rescaled variable y = x/gamma, d = delta/gamma:

    f(x) = f_Y(y) / gamma,   f_Y(y) = y * int u e^{-u^a} J0(u d) J0(u y) du
    F(x) = F_Y(y),           F_Y(y) = y * int   e^{-u^a} J0(u d) J1(u y) du

Evaluation is hybrid:

* moderate y: zero-partitioned Gauss-Legendre quadrature truncated where the
  damping factor drops under the quadrature truncation cutoff;
* large y (far tail): a power series in 1/y obtained by Mellin-type
  asymptotics of the integral, i.e. expanding 1 - e^{-u^a} J0(u d) around
  u = 0 term by term:

      1 - F_Y(y) = sum_{(i,j) != (0,0)} (-1)^{i+j+1}
                   d^{2j} / (4^j (j!)^2 i!) * T(i*a + 2j) * y^{-(i*a+2j)}

  with T(m) = 2^m Gamma(1+m/2) / Gamma(1-m/2).  T vanishes at even m, so the
  series is identically zero at alpha = 2 where the true tail is
  exponentially small.  The leading term reproduces the known power tail
  (2*gamma/x)^alpha * Gamma(1+alpha/2)/Gamma(1-alpha/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from . import _backend
from .exceptions import ConvergenceError, DomainError
from .special import DEFAULT_QUADRATURE, QuadratureSpec, segment_nodes

_SERIES_IMAX = 60
_SERIES_JMAX = 40


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple (alpha, gamma, delta) of the amplitude model."""

    alpha: float
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise DomainError("alpha must be in (0, 2]")
        if not (self.gamma > 0.0):
            raise DomainError("gamma must be > 0")
        if not (self.delta >= 0.0):
            raise DomainError("delta must be >= 0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.gamma, self.delta)


def _tail_series(alpha: float, d: float, y: float):
    """Far-tail series at rescaled abscissa y.

    Returns (tail, pdf_y, err) where ``tail`` approximates 1 - F_Y(y),
    ``pdf_y`` approximates f_Y(y) and ``err`` is an absolute error estimate
    (magnitude of the first truncated term).  Valid for y well above d.
    """
    log2 = np.log(2.0)
    logy = np.log(y)
    logd = np.log(d) if d > 0.0 else -np.inf
    tail = 0.0
    pdf_y = 0.0
    err = 0.0
    lead = 0.0
    prev_head = None
    quiet_rows = 0
    for i in range(_SERIES_IMAX + 1):
        head = None
        prev_mag = None
        row_alive = False
        for j in range(_SERIES_JMAX + 1):
            if i == 0 and j == 0:
                continue
            if d == 0.0 and j > 0:
                break
            mu = i * alpha + 2.0 * j
            # sin(pi*mu/2) with exact zeros at even mu (argument reduction)
            half = mu / 2.0
            frac = half - np.round(half)
            if frac == 0.0:
                continue
            sinpi = np.sin(np.pi * frac) * (1.0 if np.round(half) % 2.0 == 0.0 else -1.0)
            ln_t = (
                mu * log2
                + sp.gammaln(1.0 + mu / 2.0)
                + sp.gammaln(mu / 2.0)
                + np.log(abs(sinpi))
                - np.log(np.pi)
            )
            ln_c = -sp.gammaln(i + 1.0)
            if j:
                ln_c += 2.0 * j * logd - j * np.log(4.0) - 2.0 * sp.gammaln(j + 1.0)
            ln_mag = ln_t + ln_c - mu * logy
            if ln_mag < -700.0:
                mag = 0.0
            else:
                mag = np.exp(ln_mag)
            sign = (1.0 if (i + j + 1) % 2 == 0 else -1.0) * np.sign(sinpi)
            if mag == 0.0:
                continue
            if lead == 0.0:
                lead = mag
            cut = 1e-17 * lead
            if prev_mag is not None and mag > prev_mag:
                # entered the divergent part of the asymptotic row
                err = max(err, mag)
                break
            tail += sign * mag
            pdf_y += sign * mag * mu / y
            row_alive = True
            if head is None:
                head = mag
            prev_mag = mag
            if mag < cut:
                break
        if head is None:
            quiet_rows += 1
            if quiet_rows >= 4 and i >= 4:
                break
            continue
        quiet_rows = 0
        if prev_head is not None and head > prev_head:
            err = max(err, head)
            break
        prev_head = head
        if lead > 0.0 and head < 1e-17 * lead and i >= 2:
            break
        if i == _SERIES_IMAX and row_alive:
            err = max(err, head)
    return tail, pdf_y, err


class CiasrModel:
    """Cached evaluator for a fixed parameter triple.

    Shares the quadrature partition across vectorized pdf/cdf calls; all
    methods are pure and safe for concurrent readers.
    """

    #: direct-quadrature segment budget before the tail series takes over
    DIRECT_BUDGET = 2000
    #: absolute accuracy demanded of the tail series before it is trusted
    SERIES_TOL = 1e-9

    def __init__(self, params: ModelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE):
        self.params = params
        self.spec = spec
        self.d = params.delta / params.gamma
        self.u_max = np.log(1.0 / spec.tail_cutoff_epsilon) ** (1.0 / params.alpha)
        # below this the series expansion of the tail is not trustworthy
        self.series_min_y = max(1.5 * self.d, 2.0 * 0.25 ** (-1.0 / params.alpha), 4.0)

    # -- internal ---------------------------------------------------------

    def _segment_cost(self, y: np.ndarray) -> np.ndarray:
        scale = np.maximum(np.maximum(self.d, 1.0), y)
        return scale * self.u_max / np.pi

    def _direct_eval(self, y: np.ndarray, kind: str) -> np.ndarray:
        scale = max(self.d, float(np.max(y)), 1.0)
        u, w = segment_nodes(self.u_max, scale, self.spec)
        damp = np.exp(-(u**self.params.alpha))
        base = w * damp * sp.j0(u * self.d)
        if kind == "pdf":
            vals = _backend.weighted_j0_sum(u, base * u, y)
        else:
            vals = _backend.weighted_j1_sum(u, base, y)
        return y * vals

    def _series_eval(self, y: np.ndarray, kind: str) -> np.ndarray:
        out = np.empty(y.shape)
        budget = min(self.spec.max_segments, 10 * self.DIRECT_BUDGET)
        for idx, yi in enumerate(y):
            tail, pdf_y, err = _tail_series(self.params.alpha, self.d, float(yi))
            if err > self.SERIES_TOL:
                if self._segment_cost(np.asarray(yi)) <= budget:
                    out[idx] = self._direct_eval(np.asarray([yi]), kind)[0]
                    continue
                raise ConvergenceError(
                    f"tail series error estimate {err:.2e} too large at y={yi:.3g} "
                    "and direct quadrature is out of budget",
                    partial=(1.0 - tail) if kind == "cdf" else pdf_y,
                )
            out[idx] = pdf_y if kind == "pdf" else 1.0 - tail
        return out

    def _eval(self, x, kind: str):
        p = self.params
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x_arr < 0) or not np.all(np.isfinite(x_arr)):
            raise DomainError("amplitude arguments must be finite and >= 0")
        y = x_arr / p.gamma
        out = np.zeros(y.shape)
        pos = y > 0.0
        cost = self._segment_cost(y)
        series = pos & (cost > self.DIRECT_BUDGET) & (y >= self.series_min_y)
        direct = pos & ~series
        if np.any(direct):
            worst = float(np.max(cost[direct]))
            if worst > self.spec.max_segments:
                raise ConvergenceError(
                    f"direct quadrature needs ~{worst:.0f} segments > "
                    f"max_segments={self.spec.max_segments} and the point is "
                    "below the tail-series validity range",
                    work=worst,
                )
            out[direct] = self._direct_eval(y[direct], kind)
        if np.any(series):
            out[series] = self._series_eval(y[series], kind)
        if kind == "pdf":
            out = np.maximum(out / p.gamma, 0.0)
        else:
            out = np.clip(out, 0.0, 1.0)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out[0])
        return out

    # -- public -----------------------------------------------------------

    def pdf(self, x):
        """Density at amplitude(s) x; pdf(0) = 0."""
        return self._eval(x, "pdf")

    def cdf(self, x):
        """Distribution function at amplitude(s) x, in [0, 1]."""
        return self._eval(x, "cdf")

    def tail(self, x) -> float:
        """Series estimate of 1 - F(x); only valid for x deep in the tail."""
        y = float(x) / self.params.gamma
        t, _, err = _tail_series(self.params.alpha, self.d, y)
        if err > self.SERIES_TOL or y < self.series_min_y:
            raise DomainError(f"x={x:.3g} is not in the tail-series validity range")
        return t

    def cdf_interpolator(self, x_max: float, n_points: int = 1024):
        """Monotone interpolant of the cdf on [0, x_max].

        Dense linear grid over the bulk plus a geometric tail grid; returns a
        vectorized callable.  Intended for metric loops that evaluate the cdf
        at very many points (KS over full samples).
        """
        from scipy.interpolate import PchipInterpolator

        p = self.params
        x_bulk = min(p.gamma * max(self.series_min_y, 4.0 * (self.d + 1.0)), x_max)
        n_bulk = max(2, int(0.75 * n_points))
        grid = np.linspace(0.0, x_bulk, n_bulk)
        if x_max > x_bulk * (1.0 + 1e-12):
            tail_grid = np.geomspace(x_bulk, x_max, n_points - n_bulk + 2)[1:]
            grid = np.concatenate((grid, tail_grid))
        values = self.cdf(grid)
        values = np.maximum.accumulate(values)  # guard against rounding jitter
        interp = PchipInterpolator(grid, values, extrapolate=False)
        top = float(values[-1])

        def cdf_fn(x):
            x = np.asarray(x, dtype=float)
            out = interp(np.clip(x, 0.0, x_max))
            out = np.where(x >= x_max, top, out)
            return np.clip(out, 0.0, 1.0)

        return cdf_fn


@lru_cache(maxsize=64)
def _model_cache(params: ModelParams, spec: QuadratureSpec) -> CiasrModel:
    return CiasrModel(params, spec)


def model_for(params: ModelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> CiasrModel:
    """Shared evaluator instance for (params, spec)."""
    return _model_cache(params, spec)


def pdf(x, params: ModelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Amplitude density; vectorized over x."""
    return model_for(params, spec).pdf(x)


def cdf(x, params: ModelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Amplitude distribution function; vectorized over x."""
    return model_for(params, spec).cdf(x)


def pdf_htr(x, alpha: float, gamma: float, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Heavy-tailed Rayleigh density: the delta = 0 special case."""
    return pdf(x, ModelParams(alpha=alpha, gamma=gamma, delta=0.0), spec)


def pdf_rician_closed(x, gamma: float, delta: float):
    """Closed-form Rician density the model reduces to at alpha = 2.

    (x / (2 gamma^2)) exp(-(x^2 + delta^2)/(4 gamma^2)) I0(x delta / (2 gamma^2)),
    evaluated through the exponentially scaled I0 so large arguments do not
    overflow.
    """
    if gamma <= 0:
        raise DomainError("gamma must be > 0")
    if delta < 0:
        raise DomainError("delta must be >= 0")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("amplitude must be >= 0")
    two_g2 = 2.0 * gamma * gamma
    z = x_arr * delta / two_g2
    # I0(z) * exp(-(x^2+d^2)/(4 g^2)) = i0e(z) * exp(-(x-d)^2/(4 g^2))
    out = (x_arr / two_g2) * sp.i0e(z) * np.exp(-((x_arr - delta) ** 2) / (2.0 * two_g2))
    return float(out) if np.isscalar(x) else out
