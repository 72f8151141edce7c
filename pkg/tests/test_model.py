"""Density/distribution evaluation: special-case reductions, normalization,
tail behavior and the hybrid quadrature/series dispatch."""

import numpy as np
import pytest
from scipy.integrate import quad

from ciasr.exceptions import DomainError
from ciasr.model import (
    CiasrModel,
    ModelParams,
    cdf,
    model_for,
    pdf,
    pdf_htr,
    pdf_rician_closed,
)

from oracles import htr_cauchy_pdf, pdf_reference_quadrature, rician_pdf_reference


def test_params_validation():
    with pytest.raises(DomainError):
        ModelParams(alpha=0.0, gamma=1.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=2.5, gamma=1.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=1.0, gamma=0.0)
    with pytest.raises(DomainError):
        ModelParams(alpha=1.0, gamma=1.0, delta=-1.0)


def test_pdf_rejects_negative_argument():
    with pytest.raises(DomainError):
        pdf(-1.0, ModelParams(alpha=1.5, gamma=1.0))


def test_pdf_zero_at_origin():
    assert pdf(0.0, ModelParams(alpha=1.5, gamma=1.0, delta=0.0)) == 0.0


@pytest.mark.parametrize("gamma,delta", [(1.0, 0.0), (1.0, 3.0), (10.0, 50.0)])
def test_alpha2_reduces_to_rician(gamma, delta):
    params = ModelParams(alpha=2.0, gamma=gamma, delta=delta)
    x = np.linspace(0.01, delta + 8 * gamma, 50)
    numeric = pdf(x, params)
    closed = pdf_rician_closed(x, gamma, delta)
    assert np.max(np.abs(numeric - closed)) < 1e-12


def test_rician_closed_matches_reference():
    for x in (0.5, 2.0, 7.5):
        assert pdf_rician_closed(x, 1.3, 2.0) == pytest.approx(
            rician_pdf_reference(x, 1.3, 2.0), rel=1e-13
        )


def test_alpha1_delta0_closed_form():
    # at alpha = 1, delta = 0 the density is x*gamma/(gamma^2+x^2)^(3/2)
    gamma = 2.0
    x = np.linspace(0.1, 30.0, 40)
    numeric = pdf_htr(x, alpha=1.0, gamma=gamma)
    assert np.max(np.abs(numeric - htr_cauchy_pdf(x, gamma))) < 1e-12


@pytest.mark.parametrize(
    "alpha,gamma,delta,x",
    [(0.7, 1.0, 2.0, 3.0), (1.5, 2.0, 1.0, 4.0), (1.9, 1.0, 0.0, 0.7)],
)
def test_pdf_against_reference_quadrature(alpha, gamma, delta, x):
    val = pdf(x, ModelParams(alpha=alpha, gamma=gamma, delta=delta))
    ref = pdf_reference_quadrature(x / gamma, alpha, 1.0, delta / gamma) / gamma
    assert val == pytest.approx(ref, rel=1e-9)


def test_pdf_scale_equivariance():
    # pdf(x; alpha, c*gamma, c*delta) = pdf(x/c; alpha, gamma, delta)/c
    alpha, gamma, delta, c = 1.3, 2.0, 3.0, 7.0
    x = np.linspace(0.5, 60.0, 25)
    left = pdf(x, ModelParams(alpha, c * gamma, c * delta))
    right = pdf(x / c, ModelParams(alpha, gamma, delta)) / c
    assert np.allclose(left, right, rtol=1e-12, atol=1e-300)


def test_cdf_monotone_and_bounded():
    params = ModelParams(alpha=1.1, gamma=2.0, delta=5.0)
    x = np.linspace(0.0, 200.0, 300)
    f = cdf(x, params)
    assert np.all(np.diff(f) >= -1e-12)
    assert np.all((f >= 0.0) & (f <= 1.0))
    assert f[0] == 0.0


def test_cdf_matches_integrated_pdf():
    params = ModelParams(alpha=1.5, gamma=1.0, delta=2.0)
    m = CiasrModel(params)
    for x1 in (1.0, 3.0, 8.0):
        integral, err = quad(m.pdf, 0.0, x1, limit=200)
        assert m.cdf(x1) == pytest.approx(integral, abs=max(1e-10, 10 * err))


@pytest.mark.parametrize("alpha,delta", [(0.7, 0.0), (0.7, 3.0), (1.2, 1.0), (1.8, 5.0)])
def test_tail_series_consistent_with_quadrature(alpha, delta):
    m = CiasrModel(ModelParams(alpha=alpha, gamma=1.0, delta=delta))
    # alpha near 2 needs deeper x before the alternating series settles
    x = (4.0 if alpha > 1.5 else 2.0) * m.series_min_y
    direct = m._direct_eval(np.array([x]), "cdf")[0]
    assert 1.0 - m.tail(x) == pytest.approx(direct, abs=5e-9)


def test_tail_heavier_for_smaller_alpha():
    x = 40.0
    tails = [1.0 - cdf(x, ModelParams(a, 1.0, 1.0)) for a in (0.6, 1.0, 1.4, 1.8)]
    assert all(t0 > t1 > 0 for t0, t1 in zip(tails, tails[1:]))


def test_alpha2_tail_is_exponentially_small():
    assert pdf(25.0, ModelParams(2.0, 1.0, 1.0)) == 0.0
    assert cdf(25.0, ModelParams(2.0, 1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)


def test_leading_tail_coefficient():
    # 1 - F(x) ~ (2 gamma / x)^alpha * Gamma(1+alpha/2)/Gamma(1-alpha/2)
    from math import gamma as gammafn

    alpha = 0.9
    m = CiasrModel(ModelParams(alpha=alpha, gamma=1.0, delta=0.0))
    x = 1e6
    lead = (2.0 / x) ** alpha * gammafn(1 + alpha / 2) / gammafn(1 - alpha / 2)
    assert m.tail(x) == pytest.approx(lead, rel=1e-4)


def test_tail_guard_raises_in_bulk():
    m = CiasrModel(ModelParams(alpha=1.0, gamma=1.0, delta=0.0))
    with pytest.raises(DomainError):
        m.tail(0.5)


def test_vectorized_mixed_dispatch():
    # one call spanning bulk and far tail exercises both evaluation paths
    params = ModelParams(alpha=0.8, gamma=1.0, delta=2.0)
    x = np.array([0.0, 0.5, 3.0, 50.0, 1e5])
    f = cdf(x, params)
    assert np.all(np.diff(f) > 0)
    assert f[-1] > 0.999


def test_scalar_in_scalar_out():
    val = pdf(1.0, ModelParams(alpha=1.5, gamma=1.0))
    assert isinstance(val, float)


def test_model_cache_shares_instances():
    p = ModelParams(alpha=1.5, gamma=1.0, delta=0.0)
    assert model_for(p) is model_for(ModelParams(alpha=1.5, gamma=1.0, delta=0.0))


def test_cdf_interpolator_tracks_cdf():
    params = ModelParams(alpha=1.2, gamma=2.0, delta=8.0)
    m = CiasrModel(params)
    fn = m.cdf_interpolator(300.0)
    x = np.linspace(0.0, 300.0, 777)
    assert np.max(np.abs(fn(x) - m.cdf(x))) < 1e-6
    out = fn(np.array([-5.0, 1e9]))
    assert out[0] == 0.0
    assert out[1] == pytest.approx(float(m.cdf(300.0)), abs=1e-12)
