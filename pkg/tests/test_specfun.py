import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammalab.specfun import (
    DomainError,
    bessel_i_ratio,
    bessel_switchover,
    digamma_fn,
    log_bessel_i,
    log_bessel_i_derivative,
    log_bessel_i_normalized,
    log_cosh,
    log_gamma_fn,
)

mp.mp.dps = 40

ORDERS = [-0.5, 0.0, 0.5, 1.0, 2.5, 7.0, 30.0]
ARGS = [1e-8, 1e-3, 0.5, 3.0, 29.9, 30.1, 45.0, 200.0, 1e4, 1e6]


def mp_log_i(nu, z):
    return float(mp.log(mp.besseli(nu, z)))


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("z", ARGS)
def test_log_bessel_i_matches_mpmath(nu, z):
    ref = mp_log_i(nu, z)
    assert log_bessel_i(nu, z) == pytest.approx(ref, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("nu", ORDERS)
def test_continuity_across_switchover(nu):
    z0 = bessel_switchover(nu)
    lo, hi = log_bessel_i(nu, np.array([z0 * (1 - 1e-9), z0 * (1 + 1e-9)]))
    assert abs(hi - lo) < 1e-8 * max(1.0, abs(lo))


@pytest.mark.parametrize("nu", [-0.5, 0.0, 1.5, 4.0])
def test_normalized_form_is_finite_at_zero(nu):
    assert log_bessel_i_normalized(nu, 0.0) == pytest.approx(-math.lgamma(nu + 1.0), abs=1e-14)
    z = 0.7
    assert log_bessel_i_normalized(nu, z) == pytest.approx(mp_log_i(nu, z) - nu * math.log(z / 2), rel=1e-12)


@pytest.mark.parametrize("nu", [o for o in ORDERS if o >= 0.5])
@pytest.mark.parametrize("z", [0.01, 1.0, 25.0, 500.0])
def test_three_term_recurrence(nu, z):
    # I_{nu-1} - I_{nu+1} = (2 nu / z) I_nu, checked in log space
    lm, l0, lp = (log_bessel_i(nu + d, z) for d in (-1.0, 0.0, 1.0))
    lhs = math.exp(lm - l0) - math.exp(lp - l0)
    assert lhs == pytest.approx(2 * nu / z, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("nu", ORDERS)
@pytest.mark.parametrize("z", [1e-6, 0.2, 5.0, 100.0, 1e5])
def test_ratio_and_derivative(nu, z):
    ref_ratio = float(mp.besseli(nu + 1, z) / mp.besseli(nu, z))
    assert bessel_i_ratio(nu, z) == pytest.approx(ref_ratio, rel=1e-11, abs=1e-300)
    ref_der = float(mp.diff(lambda t: mp.log(mp.besseli(nu, t)), z))
    assert log_bessel_i_derivative(nu, z) == pytest.approx(ref_der, rel=1e-10)


def test_derivative_half_order_closed_form():
    # I_{-1/2}(z) = sqrt(2/(pi z)) cosh z, so d/dz ln I = tanh z - 1/(2z)
    assert log_bessel_i_derivative(-0.5, 1.0) == pytest.approx(math.tanh(1.0) - 0.5, rel=1e-13)
    assert log_bessel_i(0.5, 2.0) == pytest.approx(math.log(math.sqrt(1 / math.pi) * math.sinh(2.0)), rel=1e-13)


def test_ratio_limits():
    assert bessel_i_ratio(1.0, 0.0) == 0.0
    assert 1.0 - bessel_i_ratio(1.0, 1e8) < 1e-7


def test_no_overflow_at_large_argument():
    v = log_bessel_i(3.0, 1e6)
    assert np.isfinite(v)
    assert v == pytest.approx(1e6 - 0.5 * math.log(2 * math.pi * 1e6), rel=1e-9)


def test_domain_errors():
    with pytest.raises(DomainError):
        log_bessel_i(1.0, -1.0)
    with pytest.raises(DomainError):
        log_bessel_i(-0.5, 0.0)
    with pytest.raises(DomainError):
        log_bessel_i_derivative(1.0, 0.0)
    with pytest.raises(DomainError):
        log_gamma_fn(0.0)


@pytest.mark.parametrize("x", [1e-6, 0.5, 1.0, 7.3, 1e3])
def test_gamma_functions(x):
    assert log_gamma_fn(x) == pytest.approx(float(mp.loggamma(x)), rel=1e-13, abs=1e-14)
    assert digamma_fn(x) == pytest.approx(float(mp.digamma(x)), rel=1e-12)


def test_array_shapes_preserved():
    z = np.linspace(0.1, 50, 12).reshape(3, 4)
    assert log_bessel_i(1.0, z).shape == (3, 4)
    assert bessel_i_ratio(1.0, z).shape == (3, 4)


@settings(max_examples=60, deadline=None)
@given(z=st.floats(-700, 700))
def test_log_cosh_property(z):
    ref = float(mp.log(mp.cosh(z)))
    assert log_cosh(z) == pytest.approx(ref, rel=1e-13, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(-0.5, 20), z=st.floats(1e-3, 1e4))
def test_ratio_bounds_property(nu, z):
    # Amos lower bound; the upper bound 1 is reached in double precision for large z
    q = bessel_i_ratio(nu, z)
    lower = z / (nu + 1 + math.sqrt(z * z + (nu + 1) ** 2))
    assert lower * (1 - 1e-10) <= q <= 1.0
