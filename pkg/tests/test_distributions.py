import numpy as np
import pytest
from scipy import integrate, stats

from gammalab.distributions import (
    Affine,
    Exponential,
    Gamma,
    GammaMixture,
    LogNormal,
    MomentHypothesisError,
    Normal,
    Pareto,
    PointMass,
    check_moment_hypothesis,
    from_spec,
    gamma_relative_entropy_closed,
    sample,
    standardized,
)

LAWS = [
    Gamma(2.5, 1.5),
    Exponential(0.7),
    GammaMixture([0.3, 0.7], [Gamma(1.0, 2.0), Gamma(5.0, 1.0)]),
    LogNormal(0.2, 0.5),
    Pareto(1.0, 9.0),
    Normal(1.0, 2.0),
    Affine(Gamma(3.0, 1.0), -1.0, 0.5),
]


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.label)
def test_density_normalized_and_moments(law):
    lo, hi = law.support_bounds(1e-14)
    mass = integrate.quad(law.pdf, lo, hi, limit=400)[0]
    assert mass == pytest.approx(1.0, abs=1e-9)
    m1 = integrate.quad(lambda x: x * law.pdf(x), lo, hi, limit=400)[0]
    assert law.mean == pytest.approx(m1, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.label)
def test_score_is_log_density_derivative(law):
    lo, hi = law.support_bounds(1e-6)
    x = np.linspace(lo, hi, 9)[1:-1]
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    fd = (law.log_pdf(x + h) - law.log_pdf(x - h)) / (2 * h)
    assert np.allclose(law.score(x), fd, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.label)
def test_quadrature_grid_integrates_density(law):
    g = law.quadrature_grid()
    assert g.integrate(law.pdf(g.nodes)).value == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.label)
def test_sampling_matches_cdf(law):
    x = sample(law, 20_000, seed=3).values
    grid = np.sort(x)[:: 2000]
    lo = law.support_bounds(1e-15)[0]
    cdf = np.array([integrate.quad(law.pdf, lo, v, limit=200)[0] for v in grid])
    ecdf = np.searchsorted(np.sort(x), grid, side="right") / x.size
    assert np.max(np.abs(cdf - ecdf)) < 0.02


def test_sample_reproducible():
    a = sample(Gamma(2.0, 1.0), 100, seed=9, stream=1).values
    b = sample(Gamma(2.0, 1.0), 100, seed=9, stream=1).values
    assert np.array_equal(a, b)


def test_gamma_mgf():
    law = Gamma(2.0, 3.0)
    assert law.mgf(1.0) == pytest.approx((3.0 / 2.0) ** 2)
    assert law.mgf_radius() == 3.0


def test_relative_entropy_closed_vs_quadrature():
    p, q = Gamma(1.0, 2.0), Gamma(1.0, 1.0)
    ref = integrate.quad(lambda x: p.pdf(x) * (p.log_pdf(x) - q.log_pdf(x)), 0, np.inf)[0]
    assert gamma_relative_entropy_closed(p, q) == pytest.approx(ref, rel=1e-10)
    assert gamma_relative_entropy_closed(q, q) == 0.0
    p2 = Gamma(2.5, 0.7)
    ref2 = integrate.quad(lambda x: p2.pdf(x) * (p2.log_pdf(x) - stats.gamma(1.5, scale=1 / 1.1).logpdf(x)),
                          0, np.inf)[0]
    assert gamma_relative_entropy_closed(p2, Gamma(1.5, 1.1)) == pytest.approx(ref2, rel=1e-9)


def test_standardized_has_unit_moments():
    s = standardized(Gamma(3.0, 2.0))
    assert s.mean == pytest.approx(0.0, abs=1e-14)
    assert s.variance == pytest.approx(1.0, rel=1e-14)


def test_moment_hypothesis():
    check_moment_hypothesis(Gamma(1.0, 1.0), 1.0)
    with pytest.raises(MomentHypothesisError, match="alpha\\+4"):
        check_moment_hypothesis(Pareto(1.0, 3.0), 1.0)


@pytest.mark.parametrize("law", LAWS + [PointMass(2.0)], ids=lambda d: d.label)
def test_spec_round_trip(law):
    assert from_spec(law.to_spec()) == law


def test_from_spec_errors():
    with pytest.raises(ValueError, match="unknown"):
        from_spec({"kind": "weibull"})
    with pytest.raises(ValueError, match="missing"):
        from_spec({"kind": "gamma", "shape": 1.0})


def test_mixture_moments():
    mix = GammaMixture([0.4, 0.6], [Gamma(1.0, 2.0), Gamma(4.0, 3.0)])
    assert mix.mean == pytest.approx(1.0)
    assert mix.moment(2) == pytest.approx(0.4 * 2 / 4 + 0.6 * 20 / 9)
