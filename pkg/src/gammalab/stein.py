"""Stein residuals, gamma scores and Fisher-information functionals.

Densities passed to the quadrature functionals only need ``log_pdf(u)`` and
``score(u)`` (the log-derivative); input distributions and the channel
marginal densities both qualify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .distributions import InputDistribution, SampleBatch
from .estimation import MonteCarloEstimate, mc_mean
from .quadrature import HARD_REL_TOL, QuadratureGrid
from .specfun import DomainError

__all__ = [
    "TestFunction",
    "STANDARD_FAMILY",
    "FisherReport",
    "DataError",
    "stein_residual_gaussian",
    "stein_residual_gamma",
    "gamma_score_value",
    "standardized_gamma_fisher_quadrature",
    "r_corrected_fisher",
    "standardized_gaussian_fisher",
    "fisher_report",
    "jst_after_scaling",
    "r_corrected_from_jst",
]


class DataError(ValueError):
    """Sample values incompatible with the tested law."""


class Density(Protocol):
    def log_pdf(self, u): ...

    def score(self, u): ...


@dataclass(frozen=True)
class TestFunction:
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    description: str

    __test__ = False  # not a pytest class


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


STANDARD_FAMILY: tuple[TestFunction, ...] = (
    TestFunction(lambda x: np.ones_like(x), lambda x: np.zeros_like(x), "1"),
    TestFunction(lambda x: x, lambda x: np.ones_like(x), "x"),
    TestFunction(lambda x: x * x, lambda x: 2 * x, "x^2"),
    TestFunction(lambda x: np.exp(-x), lambda x: -np.exp(-x), "exp(-x)"),
    TestFunction(np.cos, lambda x: -np.sin(x), "cos"),
    TestFunction(np.sin, np.cos, "sin"),
    TestFunction(_sigmoid, lambda x: _sigmoid(x) * (1 - _sigmoid(x)), "sigmoid"),
)


@dataclass(frozen=True)
class FisherReport:
    j_standardized: float
    i_r_corrected: float
    alpha: float
    r: float
    route: str
    tolerance: float = 0.0


def _values(batch: SampleBatch) -> np.ndarray:
    v = np.asarray(batch.values, dtype=float)
    if v.size == 0:
        raise ValueError("empty batch")
    return v


def stein_residual_gaussian(batch: SampleBatch, phi: TestFunction) -> MonteCarloEstimate:
    """E[phi'(X)] - E[X phi(X)]; zero for every phi iff X is standard normal."""
    x = _values(batch)
    return mc_mean(phi.f_prime(x) - x * phi.f(x), batch.seed)


def stein_residual_gamma(batch: SampleBatch, alpha: float, lam: float, phi: TestFunction) -> MonteCarloEstimate:
    """E[(lam X - alpha) phi(X)] - E[X phi'(X)]; zero iff X ~ Gamma(alpha, lam)."""
    x = _values(batch)
    if np.any(x <= 0):
        raise DataError("gamma Stein residual needs positive sample values")
    return mc_mean((lam * x - alpha) * phi.f(x) - x * phi.f_prime(x), batch.seed)


def gamma_score_value(dist: InputDistribution, x):
    """Gamma score (x * score(x) + 1/2) / sqrt(x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("gamma score needs x > 0")
    out = (x * np.asarray(dist.score(x)) + 0.5) / np.sqrt(x)
    return float(out) if out.ndim == 0 else out


def _default_grid(density, grid):
    if grid is not None:
        return grid
    if hasattr(density, "quadrature_grid"):
        return density.quadrature_grid()
    raise ValueError("a quadrature grid is required for this density")


def _gamma_fisher(density: Density, alpha: float, lam: float, shift: float, grid, what: str) -> float:
    grid = _default_grid(density, grid)
    u = grid.nodes
    p = np.exp(np.asarray(density.log_pdf(u)))
    dev = np.asarray(density.score(u)) + shift - (alpha - 1.0) / u
    res = grid.integrate(p * u * dev * dev)
    # tolerance scaled by the size of the pieces being squared
    scale = grid.integrate(p * u * (shift**2 + ((alpha - 1.0) / u) ** 2)).value
    res.check(HARD_REL_TOL, 1e-10 * (1.0 + scale), what)
    return float(res.value) / lam


def standardized_gamma_fisher_quadrature(density: Density, alpha: float, lam: float,
                                         grid: QuadratureGrid | None = None) -> float:
    """(1/lam) E[X (rho(X) + lam - (alpha-1)/X)^2]; zero iff X ~ Gamma(alpha, lam)."""
    return _gamma_fisher(density, alpha, lam, lam, grid, "standardized gamma Fisher information")


def r_corrected_fisher(density: Density, alpha: float, lam: float, r: float,
                       grid: QuadratureGrid | None = None) -> float:
    """(1/lam) E[X (rho(X) + lam(1+r) - (alpha-1)/X)^2]."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return _gamma_fisher(density, alpha, lam, lam * (1.0 + r), grid, "r-corrected gamma Fisher information")


def standardized_gaussian_fisher(density: Density, mu: float, sigma2: float,
                                 grid: QuadratureGrid | None = None) -> float:
    """sigma^2 E[(rho(X) + (X - mu)/sigma^2)^2]; zero iff X ~ N(mu, sigma^2)."""
    grid = _default_grid(density, grid)
    y = grid.nodes
    p = np.exp(np.asarray(density.log_pdf(y)))
    dev = np.asarray(density.score(y)) + (y - mu) / sigma2
    res = grid.integrate(p * dev * dev)
    res.check(HARD_REL_TOL, 1e-10, "standardized Gaussian Fisher information")
    return sigma2 * float(res.value)


def jst_after_scaling(j: float, mean: float, alpha: float, lam: float, a: float) -> float:
    """J_st of a*Y against Gamma(alpha, lam) from J_st(Y) and E[Y].

    Exact for any mean; reduces to J/a + alpha (a-1)^2/a when lam E[Y] = alpha.
    """
    return j / a + 2.0 * (a - 1.0) / a * (lam * mean - alpha) + (a - 1.0) ** 2 / a * lam * mean


def r_corrected_from_jst(j: float, mean: float, alpha: float, lam: float, r: float) -> float:
    """I^r = J + 2r(lam E[X] - alpha) + lam r^2 E[X]  (= J + alpha r^2 when lam E[X] = alpha)."""
    return j + 2.0 * r * (lam * mean - alpha) + lam * r * r * mean


def fisher_report(density: Density, alpha: float, lam: float, r: float,
                  grid: QuadratureGrid | None = None) -> FisherReport:
    j = standardized_gamma_fisher_quadrature(density, alpha, lam, grid)
    i_r = r_corrected_fisher(density, alpha, lam, r, grid)
    return FisherReport(j, i_r, alpha, r, "quadrature_score", HARD_REL_TOL * max(1.0, abs(i_r)))
