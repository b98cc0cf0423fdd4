import math

import numpy as np
import pytest
from scipy import integrate

from gammalab.distributions import Gamma, Normal, PointMass, standardized
from gammalab.gaussian_channel import (
    GaussianMarginal,
    HypothesisError,
    g_debruijn_check,
    g_fisher_information,
    g_gsv_check,
    g_jst_from_mmse,
    g_mmse,
    g_mutual_information,
    g_relative_entropy,
    g_sample,
    g_score_representation_check,
    tilde_fisher_constants,
)

R_GRID = [0.1, 0.5, 1.0, 4.0, 20.0]
SQRT_2PI = math.sqrt(2 * math.pi)


@pytest.mark.parametrize("r", R_GRID)
def test_standard_normal_closed_forms(r):
    n = Normal(0.0, 1.0)
    assert g_mutual_information(n, r) == pytest.approx(0.5 * math.log1p(r), abs=1e-9)
    assert g_mmse(n, r) == pytest.approx(1.0 / (1.0 + r), abs=1e-10)
    # X_r ~ N(0, 1+r): Fisher 1/(1+r), D(N(0,1+r) || N(0,1)) = (r - ln(1+r))/2
    assert g_fisher_information(n, r) == pytest.approx(1.0 / (1.0 + r), rel=1e-9)
    assert g_relative_entropy(n, r) == pytest.approx(0.5 * (r - math.log1p(r)), abs=1e-9)


@pytest.mark.parametrize("r", [0.3, 2.0])
def test_non_gaussian_input_against_direct_quadrature(r):
    # exponential input: marginal density by scipy quad over x, MMSE by posterior moments
    d = Gamma(1.0, 1.0)
    marg = GaussianMarginal(d, r)
    sr = math.sqrt(r)

    def moments(y):
        k = lambda x, j: x**j * math.exp(-x - 0.5 * (y - sr * x) ** 2) / SQRT_2PI  # noqa: E731
        peak = min(max(y / sr, 0.0), 60.0)
        return [integrate.quad(k, 0, 80, args=(j,), points=[peak], limit=200, epsabs=0, epsrel=1e-12)[0]
                for j in range(3)]

    for y in [-1.0, 0.5, 3.0]:
        m0, m1, m2 = moments(y)
        assert marg.log_pdf(y) == pytest.approx(math.log(m0), abs=1e-10)
        assert marg.posterior_mean(np.array([y]))[0] == pytest.approx(m1 / m0, rel=1e-9)
        assert marg.posterior_variance(np.array([y]))[0] == pytest.approx(m2 / m0 - (m1 / m0) ** 2, rel=1e-8)

    def mmse_integrand(y):
        m0, m1, m2 = moments(y)
        return m2 - m1 * m1 / m0

    ref = integrate.quad(mmse_integrand, -12, 12 + 40 * sr, limit=400, epsrel=1e-10)[0]
    assert g_mmse(d, r) == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_identities_for_standardized_gamma(r):
    d = standardized(Gamma(2.0, 1.0))
    (gsv,) = g_gsv_check(d, [r])
    assert gsv.residual < 1e-6
    (db,) = g_debruijn_check(d, [r])
    assert abs(db.lhs - db.rhs) < 1e-5
    assert db.rhs == pytest.approx(db.extra["rhs_jst"], rel=1e-8)
    assert db.rhs == pytest.approx(db.extra["rhs_mmse"], rel=1e-8)
    assert g_jst_from_mmse(d, r) == pytest.approx(db.extra["jst"], rel=1e-6)


def test_identities_require_standardized_input():
    with pytest.raises(HypothesisError):
        g_gsv_check(Gamma(2.0, 1.0), [1.0])
    with pytest.raises(HypothesisError):
        g_jst_from_mmse(Normal(1.0, 1.0), 1.0)


def test_sampling_and_score_representation():
    out = g_sample(Normal(0.0, 1.0), 2.0, 100_000, seed=1)
    assert np.allclose(out.x_r, math.sqrt(2.0) * out.x + out.n)
    assert out.x_r.var() == pytest.approx(3.0, rel=0.02)
    gap = g_score_representation_check(standardized(Gamma(2.0, 1.0)), 1.0, 20_000, seed=3)
    assert gap.value < 1e-10


def test_point_mass_input():
    assert g_mmse(PointMass(1.5), 1.0) == 0.0
    assert g_mutual_information(PointMass(1.5), 1.0) == 0.0


@pytest.mark.parametrize("x,r", [(0.0, 1.0), (1.3, 0.5), (-2.0, 4.0)])
def test_tilde_fisher_constants(x, r):
    c = tilde_fisher_constants(x, r)
    assert c["closed_form"] == pytest.approx(r * (r + x * x) / (2 * (1 + r)))
    assert c["half_relative_to_standard"] == pytest.approx(c["closed_form"], rel=1e-8)
    assert abs(c["standardized_own_moments"]) < 1e-10
