"""Additive Gaussian channel X_r = sqrt(r) X + N as a calibrated baseline.

Marginals, posterior moments, mutual information and relative entropy are
all deterministic quadratures over a shared (x, y) grid, so the Gaussian
closed forms validate the same integration and differentiation machinery
that the gamma channel relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .distributions import InputDistribution, Normal
from .estimation import MonteCarloEstimate, mc_mean, richardson_derivative
from .quadrature import HARD_REL_TOL, QuadratureGrid, linear_grid
from .rng import make_rng
from .stein import standardized_gaussian_fisher

__all__ = [
    "GaussianChannelOutput",
    "GaussianMarginal",
    "g_sample",
    "g_marginal_density",
    "g_mmse",
    "g_mutual_information",
    "g_relative_entropy",
    "g_fisher_information",
    "g_score_representation_check",
    "g_jst_from_mmse",
    "g_gsv_check",
    "g_debruijn_check",
    "tilde_fisher_constants",
    "HypothesisError",
]

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


class HypothesisError(ValueError):
    """Input violates the hypothesis of an identity (e.g. not standardized)."""


@dataclass(frozen=True)
class GaussianChannelOutput:
    """Joint draws (struct of arrays) with the latent input and noise kept."""

    x: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    x_r: np.ndarray = field(repr=False)
    r: float
    seed: int

    def __len__(self):
        return self.x.size


def g_sample(dist: InputDistribution, r: float, n: int, seed: int, stream: int = 0) -> GaussianChannelOutput:
    if r < 0:
        raise ValueError("r must be >= 0")
    rng = make_rng(seed, 0x6A, stream)
    x = dist.draw(rng, n)
    noise = rng.standard_normal(n)
    return GaussianChannelOutput(x, noise, math.sqrt(r) * x + noise, r, seed)


def _log_phi(z):
    return -0.5 * z * z - _LOG_SQRT_2PI


def _input_grid(dist: InputDistribution, max_extent: float) -> QuadratureGrid:
    """Input grid whose panels are no wider than ``max_extent`` in x."""
    refine = 1
    while True:
        g = dist.quadrature_grid(refine=refine)
        panels = g.nodes.reshape(-1, 15)
        extent = float(np.max(panels[:, -1] - panels[:, 0]))
        if extent <= max_extent or refine >= 4096:
            return g
        refine *= max(2, math.ceil(extent / max_extent))


class GaussianMarginal:
    """Density of sqrt(r) X + N by quadrature over the input law."""

    def __init__(self, dist: InputDistribution, r: float):
        if r < 0:
            raise ValueError("r must be >= 0")
        self.dist, self.r = dist, float(r)
        self.sr = math.sqrt(r)
        if dist.is_point_mass:
            self.x_nodes = np.array([float(dist.value)])
            self.log_w = np.array([0.0])
        else:
            g = _input_grid(dist, 0.5 / self.sr if r > 0 else math.inf)
            self.x_nodes = g.nodes
            self.log_w = np.log(g.weights) + np.asarray(dist.log_pdf(g.nodes))
        xs = self.sr * self.x_nodes
        self.y_lo, self.y_hi = float(xs.min()) - 9.0, float(xs.max()) + 9.0

    def grid(self, panel_width: float = 0.5) -> QuadratureGrid:
        return linear_grid(self.y_lo, self.y_hi, panel_width, min_panels=8)

    def _log_joint(self, y):
        y = np.asarray(y, dtype=float)
        return self.log_w + _log_phi(y[..., None] - self.sr * self.x_nodes)

    def log_pdf(self, y):
        out = logsumexp(self._log_joint(y), axis=-1)
        return float(out) if np.ndim(y) == 0 else out

    def posterior(self, y):
        lj = self._log_joint(y)
        return np.exp(lj - logsumexp(lj, axis=-1, keepdims=True))

    def posterior_mean(self, y):
        return self.posterior(y) @ self.x_nodes

    def posterior_variance(self, y):
        post = self.posterior(y)
        m = post @ self.x_nodes
        return np.sum(post * (self.x_nodes - m[..., None]) ** 2, axis=-1)

    def score(self, y):
        """d/dy ln p(y), differentiating the Gaussian kernel under the integral."""
        y = np.asarray(y, dtype=float)
        post = self.posterior(y)
        return np.sum(post * -(y[..., None] - self.sr * self.x_nodes), axis=-1)


def g_marginal_density(dist: InputDistribution, r: float) -> GaussianMarginal:
    return GaussianMarginal(dist, r)


def _check(res, what):
    return float(res.check(HARD_REL_TOL, 1e-11, what))


def g_mmse(dist: InputDistribution, r: float, grid: QuadratureGrid | None = None) -> float:
    """E[(X - E[X|X_r])^2] by double quadrature."""
    if dist.is_point_mass:
        return 0.0
    marg = GaussianMarginal(dist, r)
    grid = grid or marg.grid()
    y = grid.nodes
    vals = np.exp(marg.log_pdf(y)) * marg.posterior_variance(y)
    return _check(grid.integrate(vals), "MMSE")


def g_mutual_information(dist: InputDistribution, r: float, grid: QuadratureGrid | None = None) -> float:
    """I(X; sqrt(r) X + N) as a double quadrature of the log-likelihood ratio."""
    if r == 0 or dist.is_point_mass:
        return 0.0
    marg = GaussianMarginal(dist, r)
    grid = grid or marg.grid()
    y = grid.nodes
    log_p = marg.log_pdf(y)
    log_k = _log_phi(y[None, :] - marg.sr * marg.x_nodes[:, None])
    inner = grid.integrate(np.exp(log_k) * (log_k - log_p[None, :]))
    w = np.exp(marg.log_w)
    return float(w @ inner.value)


def g_relative_entropy(dist: InputDistribution, r: float, grid: QuadratureGrid | None = None) -> float:
    """D(X_r || N(0,1))."""
    marg = GaussianMarginal(dist, r)
    grid = grid or marg.grid()
    y = grid.nodes
    log_p = marg.log_pdf(y)
    return _check(grid.integrate(np.exp(log_p) * (log_p - _log_phi(y))), "Gaussian relative entropy")


def g_fisher_information(dist: InputDistribution, r: float, grid: QuadratureGrid | None = None) -> float:
    """E[rho_r(X_r)^2]."""
    marg = GaussianMarginal(dist, r)
    grid = grid or marg.grid()
    y = grid.nodes
    return _check(grid.integrate(np.exp(marg.log_pdf(y)) * marg.score(y) ** 2), "Fisher information")


def g_score_representation_check(dist: InputDistribution, r: float, n: int, seed: int) -> MonteCarloEstimate:
    """MC mean of (rho_r(X_r) - (sqrt(r) E[X|X_r] - X_r))^2 over channel draws.

    The score is taken as a central difference of the log marginal so that
    both sides are computed by separate routes.
    """
    if r <= 0:
        raise ValueError("r must be > 0")
    out = g_sample(dist, r, n, seed)
    marg = GaussianMarginal(dist, r)
    y = out.x_r
    gap = np.empty(n)
    for sl in np.array_split(np.arange(n), max(1, n // 2048)):
        ys = y[sl]
        h = 1e-4 * (1.0 + np.abs(ys))
        rho = (marg.log_pdf(ys + h) - marg.log_pdf(ys - h)) / (2 * h)
        gap[sl] = rho - (marg.sr * marg.posterior_mean(ys) - ys)
    return mc_mean(gap * gap, seed)


def _require_standardized(dist: InputDistribution, tol: float = 1e-9):
    m = dist.mean
    v = dist.moment(2)
    if abs(m) > tol or abs(v - 1.0) > tol:
        raise HypothesisError(f"input must be centered with E[X^2] = 1 (mean {m:.3g}, E[X^2] {v:.6g})")


def g_jst_from_mmse(dist: InputDistribution, r: float, grid: QuadratureGrid | None = None) -> float:
    """J_st(X_r) = r (1 - (1+r) MMSE) for centered, unit-variance input."""
    _require_standardized(dist)
    return r * (1.0 - (1.0 + r) * g_mmse(dist, r, grid))


@dataclass(frozen=True)
class GaussianIdentityRow:
    identity: str
    r: float
    lhs: float
    rhs: float
    fd_error: float
    extra: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def g_gsv_check(dist: InputDistribution, r_grid, h: float | None = None) -> list[GaussianIdentityRow]:
    """d/dr I(X; X_r) by finite differences against MMSE/2 on each r."""
    _require_standardized(dist)
    rows = []
    for r in r_grid:
        d, err = richardson_derivative(lambda s: g_mutual_information(dist, s), r, h)
        mmse = g_mmse(dist, r)
        rows.append(GaussianIdentityRow("GAUSS_GSV", r, d, 0.5 * mmse, err,
                                        {"mi": g_mutual_information(dist, r), "mmse": mmse}))
    return rows


def g_debruijn_check(dist: InputDistribution, r_grid, h: float | None = None) -> list[GaussianIdentityRow]:
    """d/dr D(X_r||N) against (I(X_r) - 1 + r)/(2r) and (r + J_st/r)/(2(1+r))."""
    _require_standardized(dist)
    rows = []
    for r in r_grid:
        d, err = richardson_derivative(lambda s: g_relative_entropy(dist, s), r, h)
        fisher = g_fisher_information(dist, r)
        marg = GaussianMarginal(dist, r)
        jst = standardized_gaussian_fisher(marg, 0.0, 1.0 + r, marg.grid())
        rhs_fisher = (fisher - 1.0 + r) / (2.0 * r)
        rhs_jst = (r + jst / r) / (2.0 * (1.0 + r))
        mmse = g_mmse(dist, r)
        rows.append(GaussianIdentityRow("GAUSS_DEBRUIJN", r, d, rhs_fisher, err,
                                        {"rhs_jst": rhs_jst, "rhs_mmse": 0.5 * (1.0 - mmse), "jst": jst}))
    return rows


def tilde_fisher_constants(x: float, r: float) -> dict:
    """Fisher-type functionals of sqrt(tau) x + sqrt(1-tau) N with tau = r/(1+r).

    Returns the closed-form constant r(r+x^2)/(2(1+r)), the standardized
    functional (own mean and variance, identically 0 for a Gaussian), and half
    the Fisher information relative to N(0,1), the latter two by quadrature.
    """
    tau = r / (1.0 + r)
    m, s2 = math.sqrt(tau) * x, 1.0 - tau
    law = Normal(m, math.sqrt(s2))
    grid = linear_grid(m - 12 * math.sqrt(s2), m + 12 * math.sqrt(s2), 0.25 * math.sqrt(s2))
    y = grid.nodes
    p = np.exp(law.log_pdf(y))
    own = s2 * grid.integrate(p * (law.score(y) + (y - m) / s2) ** 2).value
    rel_std = grid.integrate(p * (law.score(y) + y) ** 2).value
    return {
        "closed_form": 0.5 * r * (r + x * x) / (1.0 + r),
        "standardized_own_moments": float(own),
        "half_relative_to_standard": 0.5 * float(rel_std),
    }
