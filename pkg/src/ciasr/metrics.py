"""Baseline amplitude models (Weibull, log-normal) and goodness-of-fit metrics.

The comparison protocol fits several candidate models to the same amplitude
sample and scores each with

* the Kullback-Leibler divergence between the empirical histogram and the
  model's per-bin probability mass, and
* the two-sided Kolmogorov-Smirnov statistic against the model cdf.

Any model enters the comparison through its cdf callable, so external models
can be scored alongside the built-in ones.
"""

from __future__ import annotations

import csv
import io
import warnings as _warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as sp

from .exceptions import ConvergenceError, DomainError
from .model import ModelParams

_NEWTON_TOL = 1e-10
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class HistogramSpec:
    """Density-normalized histogram layout for the divergence metric.

    The default upper edge (when ``upper`` is None) is 1.01 times the largest
    sample, so the top bin always contains the sample maximum.
    """

    bin_count: int = 512
    upper: float | None = None

    def __post_init__(self):
        if self.bin_count < 2:
            raise DomainError("bin_count must be >= 2")
        if self.upper is not None and not (self.upper > 0):
            raise DomainError("upper must be > 0")

    def edges(self, samples: np.ndarray) -> np.ndarray:
        upper = self.upper if self.upper is not None else 1.01 * float(np.max(samples))
        if float(np.max(samples)) > upper:
            raise DomainError("histogram range does not cover the sample range")
        return np.linspace(0.0, upper, self.bin_count + 1)


@dataclass(frozen=True)
class MetricReport:
    """Goodness-of-fit scores of one model on one sample set."""

    model_name: str
    kl_div: float
    ks_score: float

    def __post_init__(self):
        if not (self.kl_div >= 0.0 or np.isnan(self.kl_div)):
            raise DomainError("kl_div must be >= 0")
        if not (np.isnan(self.ks_score) or 0.0 <= self.ks_score <= 1.0):
            raise DomainError("ks_score must lie in [0, 1]")


def _positive_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("samples must be non-empty")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("samples must be positive and finite")
    return x


def fit_weibull(samples) -> tuple[float, float]:
    """Maximum-likelihood (shape, scale) of the Weibull law.

    Newton iteration on the profile-likelihood shape equation

        1/k + mean(ln x) - sum(x^k ln x) / sum(x^k) = 0

    to 1e-10; the scale then follows as (mean(x^k))^(1/k).  Samples are
    rescaled by their maximum inside the iteration so x^k cannot overflow.
    """
    x = _positive_samples(samples)
    logx = np.log(x)
    log_spread = float(np.std(logx))
    if log_spread == 0.0:
        raise ConvergenceError("constant samples: the Weibull likelihood is degenerate")
    scale_norm = float(np.max(x))
    z = x / scale_norm
    logz = logx - np.log(scale_norm)
    mean_logz = float(np.mean(logz))

    # moment-matched starting point (log-Weibull variance is (pi^2/6)/k^2)
    k = float(np.pi / (np.sqrt(6.0) * log_spread))
    for _ in range(_NEWTON_MAX_ITER):
        zk = z**k
        s0 = float(np.mean(zk))
        s1 = float(np.mean(zk * logz))
        s2 = float(np.mean(zk * logz * logz))
        g = 1.0 / k + mean_logz - s1 / s0
        dg = -1.0 / k**2 - (s2 * s0 - s1 * s1) / s0**2
        step = g / dg
        k_next = k - step
        if not (k_next > 0) or not np.isfinite(k_next):
            k_next = 0.5 * k
        if abs(k_next - k) <= _NEWTON_TOL * max(1.0, k):
            k = k_next
            break
        k = k_next
    else:
        raise ConvergenceError(
            f"Weibull shape iteration did not reach {_NEWTON_TOL} in "
            f"{_NEWTON_MAX_ITER} steps",
            partial=k,
            work=_NEWTON_MAX_ITER,
        )
    lam = scale_norm * float(np.mean(z**k)) ** (1.0 / k)
    return float(k), lam


def weibull_cdf(x, shape: float, scale: float):
    """Weibull cdf 1 - exp(-(x/scale)^shape), zero on the negative axis."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, -np.expm1(-((np.maximum(x, 0.0) / scale) ** shape)), 0.0)
    return out


def fit_lognormal(samples) -> tuple[float, float]:
    """Maximum-likelihood (mu, sigma) of the log-normal law."""
    x = _positive_samples(samples)
    logx = np.log(x)
    return float(np.mean(logx)), float(np.std(logx))


def lognormal_cdf(x, mu: float, sigma: float):
    """Log-normal cdf Phi((ln x - mu)/sigma); a point mass when sigma = 0."""
    x = np.asarray(x, dtype=float)
    if sigma == 0.0:
        return np.where(np.log(np.maximum(x, np.finfo(float).tiny)) >= mu, 1.0, 0.0)
    with np.errstate(divide="ignore"):
        z = (np.log(np.maximum(x, 0.0)) - mu) / sigma
    return np.where(x > 0, sp.ndtr(z), 0.0)


def kl_div(
    samples,
    model_cdf: Callable[[np.ndarray], np.ndarray],
    spec: HistogramSpec = HistogramSpec(),
) -> float:
    """KL divergence of the empirical histogram from the model's bin masses.

    Model bin mass is the cdf difference across each bin (midpoint pdf values
    are biased in heavy-tailed bins).  Empty empirical bins contribute zero.
    When the model assigns zero mass to a bin that holds samples the
    divergence is +inf; a warning is emitted in that case.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("samples must be non-empty")
    edges = spec.edges(x)
    counts, _ = np.histogram(x, bins=edges)
    p = counts / counts.sum()
    cdf_vals = np.asarray(model_cdf(edges), dtype=float)
    q = np.diff(cdf_vals)
    q = np.maximum(q, 0.0)
    occupied = p > 0
    if np.any(occupied & (q == 0.0)):
        _warnings.warn(
            "model assigns zero mass to an occupied histogram bin; "
            "KL divergence is +inf",
            RuntimeWarning,
            stacklevel=2,
        )
        return float("inf")
    return float(np.sum(p[occupied] * np.log(p[occupied] / q[occupied])))


def ks_score(samples, model_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of the sample against the cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("samples must be non-empty")
    f = np.asarray(model_cdf(x), dtype=float)
    grid = np.arange(n + 1) / n
    d_plus = float(np.max(grid[1:] - f))
    d_minus = float(np.max(f - grid[:-1]))
    return min(max(d_plus, d_minus, 0.0), 1.0)


def param_mse(
    true_params: Sequence[ModelParams],
    est_params: Sequence[ModelParams],
) -> tuple[float, float, float]:
    """Coordinate-wise mean squared error over paired parameter lists."""
    if len(true_params) != len(est_params) or len(true_params) == 0:
        raise DomainError("parameter lists must have equal nonzero length")
    t = np.array([p.as_tuple() for p in true_params])
    e = np.array([p.as_tuple() for p in est_params])
    mse = np.mean((t - e) ** 2, axis=0)
    return (float(mse[0]), float(mse[1]), float(mse[2]))


def reports_to_csv(rows: Sequence[tuple[str, MetricReport]]) -> str:
    """Render (scene_id, report) pairs as CSV with a fixed column layout."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scene-id", "model", "kl_div", "ks_score"])
    for scene_id, report in rows:
        writer.writerow(
            [scene_id, report.model_name, repr(report.kl_div), repr(report.ks_score)]
        )
    return buf.getvalue()
