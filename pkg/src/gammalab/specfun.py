"""Log-space special functions for gamma densities and noncentral-gamma kernels.

Everything here returns natural logarithms (or derivatives of them) so that
channel kernels such as ``exp(-lam*u) * I_nu(2*lam*sqrt(u*r*x))`` can be
composed without overflow.  Arguments are scalars or numpy arrays; ``nu`` is
a scalar order.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "log_gamma_fn",
    "digamma_fn",
    "log_bessel_i",
    "log_bessel_i_normalized",
    "log_bessel_i_derivative",
    "bessel_i_ratio",
    "log_cosh",
    "bessel_switchover",
]

EULER_GAMMA = 0.57721566490153286061


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


def _as_array(x):
    return np.asarray(x, dtype=float)


def _unwrap(x, scalar):
    return float(x) if scalar else x


def log_gamma_fn(x):
    """Natural log of the gamma function for positive arguments."""
    arr = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError("log_gamma_fn requires x > 0")
    out = special.gammaln(arr)
    return _unwrap(out, arr.ndim == 0)


# Bernoulli-number coefficients of the digamma asymptotic series:
# psi(x) ~ ln x - 1/(2x) - sum_k B_2k / (2k x^2k)
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma_fn(x):
    """Digamma function psi(x) for x > 0.

    Shifts the argument upward with psi(x+1) = psi(x) + 1/x until x >= 6 and
    then sums the asymptotic series.
    """
    arr = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError("digamma_fn requires x > 0")
    scalar = arr.ndim == 0
    y = np.atleast_1d(arr).astype(float).copy()
    shift = np.zeros_like(y)
    for _ in range(6):
        small = y < 6.0
        if not np.any(small):
            break
        shift[small] += 1.0 / y[small]
        y[small] += 1.0
    inv2 = 1.0 / (y * y)
    series = np.zeros_like(y)
    for c in reversed(_DIGAMMA_COEFFS):
        series = series * inv2 + c
    out = np.log(y) - 0.5 / y - series * inv2 - shift
    return _unwrap(out[0] if scalar else out, scalar)


def bessel_switchover(nu: float) -> float:
    """Argument above which the large-z asymptotic branch is used."""
    return 30.0 + 2.0 * abs(nu)


def _check_order(nu):
    if not np.isscalar(nu) and np.ndim(nu) != 0:
        raise TypeError("Bessel order must be a scalar")
    nu = float(nu)
    if nu < -0.5:
        raise DomainError(f"Bessel order nu={nu} is below -1/2")
    return nu


def _series_log_normalized(nu: float, z: np.ndarray) -> np.ndarray:
    """ln sum_k (z^2/4)^k / (k! (nu+1)_k); all terms positive, no cancellation."""
    q = 0.25 * z * z
    total = np.ones_like(z)
    term = np.ones_like(z)
    kmax = int(np.ceil(z.max(initial=0.0))) + 60
    for k in range(1, kmax + 1):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return np.log(total)


def _asymptotic_log_scaled(nu: float, z: np.ndarray) -> np.ndarray:
    """ln(I_nu(z) e^{-z} sqrt(2 pi z)) from the Hankel expansion."""
    mu = 4.0 * nu * nu
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 200):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # Past k ~ nu the series turns divergent; truncate at the smallest term.
        if k > abs(nu) + 1:
            active &= np.abs(nxt) < np.abs(term)
        if not np.any(active):
            break
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
        active &= np.abs(term) > 1e-17 * np.abs(total)
        if not np.any(active):
            break
    return np.log(total)


def log_bessel_i_normalized(nu, z):
    """ln( I_nu(z) / (z/2)^nu ), finite down to z = 0 for nu >= -1/2.

    At z = 0 the value is -ln Gamma(nu+1).
    """
    nu = _check_order(nu)
    arr = _as_array(z)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("Bessel argument must be >= 0")
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr)
    out = np.empty_like(zz)
    big = zz >= bessel_switchover(nu)
    if np.any(~big):
        zs = zz[~big]
        out[~big] = _series_log_normalized(nu, zs) - math.lgamma(nu + 1.0)
    if np.any(big):
        zb = zz[big]
        out[big] = (
            zb
            - 0.5 * np.log(2.0 * np.pi * zb)
            + _asymptotic_log_scaled(nu, zb)
            - nu * np.log(0.5 * zb)
        )
    return _unwrap(out[0] if scalar else out, scalar)


def log_bessel_i(nu, z):
    """ln I_nu(z) for order nu >= -1/2 and z >= 0.

    Power series below ``bessel_switchover(nu)``, exponentially scaled Hankel
    expansion above it, so the result never overflows for z up to 1e6.
    ``I_{-1/2}(0)`` is infinite and raises.
    """
    nu = _check_order(nu)
    arr = _as_array(z)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("Bessel argument must be >= 0")
    if nu < 0 and np.any(arr == 0):
        raise DomainError("ln I_nu(0) diverges for nu < 0")
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr)
    out = np.empty_like(zz)
    big = zz >= bessel_switchover(nu)
    if np.any(~big):
        zs = zz[~big]
        with np.errstate(divide="ignore"):
            lead = np.where(zs > 0, nu * np.log(0.5 * np.where(zs > 0, zs, 1.0)), 0.0)
        out[~big] = _series_log_normalized(nu, zs) - math.lgamma(nu + 1.0) + lead
    if np.any(big):
        zb = zz[big]
        # add z last so the large term is rounded only once
        out[big] = (_asymptotic_log_scaled(nu, zb) - 0.5 * np.log(2.0 * np.pi * zb)) + zb
    return _unwrap(out[0] if scalar else out, scalar)


def bessel_i_ratio(nu, z):
    """I_{nu+1}(z) / I_nu(z), evaluated without forming either function.

    Equals 0 at z = 0 and tends to 1 as z grows.
    """
    nu = _check_order(nu)
    arr = _as_array(z)
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be >= 0")
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr)
    out = np.zeros_like(zz)
    pos = zz > 0
    if np.any(pos):
        zp = zz[pos]
        small = zp < bessel_switchover(nu + 1.0)
        res = np.empty_like(zp)
        if np.any(small):
            zs = zp[small]
            # I_{nu+1}/I_nu = (z/2) * Inorm_{nu+1} / Inorm_nu
            res[small] = (0.5 * zs) * np.exp(
                _series_log_normalized(nu + 1.0, zs)
                - _series_log_normalized(nu, zs)
                - math.lgamma(nu + 2.0)
                + math.lgamma(nu + 1.0)
            )
        if np.any(~small):
            zb = zp[~small]
            res[~small] = np.exp(
                _asymptotic_log_scaled(nu + 1.0, zb) - _asymptotic_log_scaled(nu, zb)
            )
        # the ratio lies in [0, 1); rounding in the series quotient can exceed 1 by an ulp or two
        out[pos] = np.minimum(res, 1.0)
    return _unwrap(out[0] if scalar else out, scalar)


def log_bessel_i_derivative(nu, z):
    """d/dz ln I_nu(z) for z > 0.

    Uses I'_nu = I_{nu+1} + (nu/z) I_nu, which stays stable for every order
    nu >= -1/2 (the ratio I_{nu+1}/I_nu lies in [0, 1)).
    """
    arr = _as_array(z)
    if np.any(~(arr > 0)):
        raise DomainError("log_bessel_i_derivative requires z > 0")
    nu = _check_order(nu)
    out = bessel_i_ratio(nu, arr) + nu / arr
    return out


def log_cosh(z):
    """ln cosh(z) without overflow."""
    a = np.abs(_as_array(z))
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
