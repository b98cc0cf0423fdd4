"""Quadratic gamma channel X_r = G + (sqrt(r X) + N / sqrt(2 lam))^2.

G ~ Gamma(alpha - 1/2, lam) (identically 0 when alpha = 1/2) and N is
standard normal.  Given X = x the output has the noncentral-gamma density

    k(u | x) = lam^alpha u^(alpha-1) exp(-lam (u + r x)) Inorm_{alpha-1}(2 lam sqrt(u r x))

with Inorm_nu(z) = I_nu(z) / (z/2)^nu, which is also the Poisson(lam r x)
mixture of Gamma(alpha + k, lam) laws.  The marginal density, its score and
the posterior expectations below are quadratures of this kernel over the
input law on a grid uniform in sqrt(x); output integrals use a grid uniform
in sqrt(u).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from .distributions import (
    TAIL_EPS,
    Gamma,
    GammaMixture,
    InputDistribution,
    PointMass,
)
from .estimation import (
    BinnedRegression,
    MonteCarloEstimate,
    binned_regression,
    default_bin_count,
    mc_mean,
    mean_squared_regression,
)
from .quadrature import (
    HARD_REL_TOL,
    QuadratureAccuracyError,
    QuadratureGrid,
    sqrt_grid,
)
from .rng import make_rng, sample_gamma
from .specfun import DomainError, log_bessel_i_normalized
from .stein import jst_after_scaling, standardized_gamma_fisher_quadrature

__all__ = [
    "ChannelParams",
    "ChannelRecords",
    "ChannelGrids",
    "ChannelMarginal",
    "MarginalEval",
    "ch_sample",
    "ch_conditional_log_density",
    "ch_marginal_log_density",
    "channel_grids",
    "closed_form_output",
    "output_rate",
    "ch_mgf",
    "mgf_window",
    "ch_conditional_expectation",
    "ch_jst_mc",
    "ch_jst_quadrature",
    "ch_score_representation_check",
    "ch_mutual_information",
    "ch_mutual_information_mc",
    "ch_relative_entropy",
    "marginal_table",
]

_CHUNK = 512


@dataclass(frozen=True)
class ChannelParams:
    alpha: float
    lam: float
    r: float

    def __post_init__(self):
        if not self.alpha >= 0.5:
            raise ValueError(f"channel needs alpha >= 1/2 (got alpha={self.alpha})")
        if not self.lam > 0:
            raise ValueError(f"channel needs lambda > 0 (got {self.lam})")
        if not self.r >= 0:
            raise ValueError(f"channel needs r >= 0 (got {self.r})")

    def with_r(self, r: float) -> "ChannelParams":
        return ChannelParams(self.alpha, self.lam, r)


@dataclass(frozen=True, eq=False)
class ChannelRecords:
    """Channel draws as parallel arrays; every latent is retained."""

    x: np.ndarray
    g: np.ndarray
    n: np.ndarray
    y_r: np.ndarray
    x_r: np.ndarray
    params: ChannelParams
    seed: int

    def __post_init__(self):
        for name in ("x", "g", "n", "y_r", "x_r"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return self.x.size

    @property
    def v_r(self) -> np.ndarray:
        """Y_r / sqrt(X_r), in [-1, 1] since X_r >= Y_r^2."""
        with np.errstate(invalid="ignore", divide="ignore"):
            v = self.y_r / np.sqrt(self.x_r)
        return np.clip(np.nan_to_num(v), -1.0, 1.0)

    def to_csv(self, path) -> None:
        cols = np.column_stack([self.x, self.g, self.n, self.y_r, self.x_r, self.v_r])
        np.savetxt(path, cols, delimiter=",", header="x,g,n,y_r,x_r,v_r", comments="", fmt="%.17g")


def ch_sample(dist: InputDistribution, params: ChannelParams, n: int, seed: int,
              stream: int = 0) -> ChannelRecords:
    if not dist.positive:
        raise DomainError("the gamma channel needs a positive input")
    rng = make_rng(seed, 0x7B, stream)
    a, lam, r = params.alpha, params.lam, params.r
    x = np.asarray(dist.draw(rng, n), dtype=float)
    g = sample_gamma(rng, a - 0.5, lam, n)
    noise = rng.standard_normal(n)
    y = np.sqrt(r * x) + noise / math.sqrt(2.0 * lam)
    return ChannelRecords(x, g, noise, y, g + y * y, params, seed)


# ------------------------------------------------------------------ kernel


def _kernel_parts(params: ChannelParams, x, u, with_ratio: bool = False):
    """ln k(u|x) and optionally I_alpha/I_{alpha-1} at z = 2 lam sqrt(u r x)."""
    a, lam, r = params.alpha, params.lam, params.r
    rx = r * x
    z = 2.0 * lam * np.sqrt(u * rx)
    lin = log_bessel_i_normalized(a - 1.0, z)
    lk = a * math.log(lam) + (a - 1.0) * np.log(u) - lam * (u + rx) + lin
    if not with_ratio:
        return lk, None
    # I_a / I_{a-1} = (z/2) Inorm_a / Inorm_{a-1}
    ratio = 0.5 * z * np.exp(log_bessel_i_normalized(a, z) - lin)
    return lk, ratio


def ch_conditional_log_density(params: ChannelParams, x, u):
    """ln p_{X_r | X = x}(u); reduces to ln Gamma(alpha, lam)(u) when r x = 0."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("conditional density needs u > 0")
    if np.any(x < 0):
        raise DomainError("conditional density needs x >= 0")
    x, u = np.broadcast_arrays(x, u)
    lk, _ = _kernel_parts(params, x.ravel(), u.ravel())
    lk = lk.reshape(x.shape)
    return float(lk) if lk.ndim == 0 else lk


# ------------------------------------------------------------------ grids


@dataclass(frozen=True, eq=False)
class ChannelGrids:
    """Input grid (None for a point mass) and output grid."""

    x: QuadratureGrid | None
    u: QuadratureGrid

    def digest(self) -> str:
        h = hashlib.sha256()
        if self.x is not None:
            h.update(self.x.nodes.tobytes())
        h.update(self.u.nodes.tobytes())
        return h.hexdigest()[:16]


def _input_grid(dist: InputDistribution, max_dt: float, eps: float) -> QuadratureGrid:
    refine = 1
    while True:
        g = dist.quadrature_grid(eps=eps, refine=refine)
        t = np.sqrt(g.nodes).reshape(-1, 15)
        dt = float(np.max(t[:, -1] - t[:, 0]))
        if dt <= max_dt or refine >= 4096:
            return g
        refine *= max(2, math.ceil(dt / max_dt))


def _upper_output(dist: InputDistribution, params: ChannelParams, eps: float) -> float:
    a, lam, r = params.alpha, params.lam, params.r
    g_hi = stats.gamma(a - 0.5, scale=1.0 / lam).isf(eps) if a > 0.5 else 0.0
    x_hi = dist.support_bounds(eps)[1]
    return float(g_hi + 2.0 * r * x_hi + stats.chi2(1).isf(eps) / lam)


def channel_grids(dist: InputDistribution, params: ChannelParams, eps: float = TAIL_EPS,
                  refine: float = 1.0) -> ChannelGrids:
    """Quadrature grids sized for ``params``; reuse them across nearby r.

    Input panels are at most 0.5/sqrt(lam r) wide in sqrt(x), which is the
    kernel's width in that coordinate; output panels are 0.5/sqrt(lam) wide in
    sqrt(u), with geometric refinement toward u = 0.  The input grid reaches
    eps**2 into the tails so that the posterior of X stays resolved across the
    whole output grid.
    """
    if not dist.positive:
        raise DomainError("the gamma channel needs a positive input")
    lam, r = params.lam, params.r
    if dist.is_point_mass or r == 0:
        xg = None
    else:
        xg = _input_grid(dist, 0.5 / math.sqrt(lam * r) / refine, eps * eps)
    u_hi = _upper_output(dist, params, eps / 3)
    ug = sqrt_grid(0.0, u_hi, 0.5 / math.sqrt(lam) / refine, min_panels=24, n_refine=20,
                   tail_mass=eps)
    return ChannelGrids(xg, ug)


# ------------------------------------------------------------------ marginal


@dataclass(frozen=True, eq=False)
class MarginalEval:
    """Marginal quantities at a set of output points.

    ``cond_sqrt_rx_v`` is E[sqrt(r X) V_r | X_r = u], ``cond_sqrt_x_v`` the
    same without r, and ``cond_v`` is E[V_r | X_r = u].
    """

    u: np.ndarray
    log_pdf: np.ndarray
    score: np.ndarray
    cond_sqrt_rx_v: np.ndarray
    cond_sqrt_x_v: np.ndarray
    cond_v: np.ndarray
    rel_error: np.ndarray


class ChannelMarginal:
    """Density of X_r as a quadrature mixture of the conditional kernel."""

    def __init__(self, dist: InputDistribution, params: ChannelParams,
                 grids: ChannelGrids | None = None):
        self.dist, self.params = dist, params
        self.grids = grids or channel_grids(dist, params)
        if self.grids.x is None:
            x0 = float(dist.value) if dist.is_point_mass else 1.0
            self.x_nodes = np.array([x0])
            self.log_px = np.zeros(1)
            self._x_grid = None
        else:
            g = self.grids.x
            self.x_nodes = g.nodes
            self.log_px = np.asarray(dist.log_pdf(g.nodes))
            self._x_grid = g
        with np.errstate(divide="ignore"):
            self._log_wx = (np.log(self._x_grid.weights) if self._x_grid is not None else np.zeros(1)) + self.log_px
        self._memo = None

    def output_grid(self) -> QuadratureGrid:
        return self.grids.u

    def _chunk(self, u):
        a, lam, r = self.params.alpha, self.params.lam, self.params.r
        lk, ratio = _kernel_parts(self.params, self.x_nodes[None, :], u[:, None], with_ratio=True)
        if self._x_grid is None:
            log_p, rel = lk[:, 0], np.zeros(u.size)
        else:
            res = self._x_grid.log_integrate(lk + self.log_px)
            log_p, rel = res.value, res.error
        w = np.exp(lk + self._log_wx - log_p[:, None])
        sx = np.sqrt(self.x_nodes)
        cond_sqrt_x_v = np.sum(w * ratio * sx, axis=1)
        cond_v = np.sum(w * ratio, axis=1)
        sr = math.sqrt(r)
        score = (a - 1.0) / u - lam + lam * sr * cond_sqrt_x_v / np.sqrt(u)
        return log_p, score, sr * cond_sqrt_x_v, cond_sqrt_x_v, cond_v, rel

    def evaluate(self, u) -> MarginalEval:
        u = np.asarray(u, dtype=float).ravel()
        if np.any(~(u > 0)):
            raise DomainError("marginal density needs u > 0")
        key = (u.size, hashlib.sha1(u.tobytes()).hexdigest())
        if self._memo is not None and self._memo[0] == key:
            return self._memo[1]
        parts = [self._chunk(u[i:i + _CHUNK]) for i in range(0, u.size, _CHUNK)]
        cols = [np.concatenate(c) for c in zip(*parts)]
        ev = MarginalEval(u, *cols)
        self._memo = (key, ev)
        return ev

    def check_accuracy(self, u, rel_tol: float = HARD_REL_TOL) -> float:
        err = float(np.max(self.evaluate(u).rel_error))
        if err > rel_tol:
            raise QuadratureAccuracyError(f"marginal density relative error {err:.2e} exceeds {rel_tol:.1e}")
        return err

    def _shaped(self, u, attr):
        arr = np.asarray(u, dtype=float)
        out = getattr(self.evaluate(arr), attr).reshape(arr.shape)
        return float(out) if out.ndim == 0 else out

    def log_pdf(self, u):
        return self._shaped(u, "log_pdf")

    def __call__(self, u):
        return self.log_pdf(u)

    def pdf(self, u):
        return np.exp(self.log_pdf(u))

    def score(self, u):
        """d/du ln p(u), from the analytic u-derivative of the kernel."""
        return self._shaped(u, "score")

    def gamma_deviation(self, u):
        """sqrt(u) (score + lam - (alpha-1)/u) = lam E[sqrt(r X) V_r | X_r = u]."""
        return self.params.lam * self._shaped(u, "cond_sqrt_rx_v")

    def conditional_v(self, u):
        return self._shaped(u, "cond_v")


def ch_marginal_log_density(dist: InputDistribution, params: ChannelParams,
                            grids: ChannelGrids | None = None) -> ChannelMarginal:
    return ChannelMarginal(dist, params, grids)


def marginal_table(marg: ChannelMarginal, cache_dir=None) -> dict:
    """Marginal quantities on the output grid, optionally cached as ``.npz``.

    The cache key hashes the input law, channel parameters and grid nodes.
    """
    key = hashlib.sha256(json.dumps(
        [marg.dist.to_spec(), [marg.params.alpha, marg.params.lam, marg.params.r], marg.grids.digest()],
        sort_keys=True).encode()).hexdigest()[:24]
    path = Path(cache_dir) / f"marginal-{key}.npz" if cache_dir is not None else None
    if path is not None and path.exists():
        with np.load(path) as data:
            return dict(data)
    ev = marg.evaluate(marg.grids.u.nodes)
    table = {name: getattr(ev, name) for name in
             ("u", "log_pdf", "score", "cond_sqrt_rx_v", "cond_sqrt_x_v", "cond_v", "rel_error")}
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, **table)
    return table


# ------------------------------------------------------------------ closed forms


def output_rate(input_rate: float, params: ChannelParams) -> float:
    """Rate of X_r for Gamma(alpha, input_rate) input: (r/rate + 1/lam)^-1."""
    return 1.0 / (params.r / input_rate + 1.0 / params.lam)


def closed_form_output(dist: InputDistribution, params: ChannelParams) -> InputDistribution | None:
    """Exact law of X_r when the input is gamma (or a gamma mixture) with shape alpha."""
    a = params.alpha
    if isinstance(dist, PointMass) and dist.value == 0 or params.r == 0:
        return Gamma(a, params.lam)
    if isinstance(dist, Gamma) and math.isclose(dist.shape, a, rel_tol=0, abs_tol=1e-14):
        return Gamma(a, output_rate(dist.rate, params))
    if isinstance(dist, GammaMixture) and all(
            math.isclose(c.shape, a, rel_tol=0, abs_tol=1e-14) for c in dist.components):
        return GammaMixture(dist.weights, tuple(Gamma(a, output_rate(c.rate, params)) for c in dist.components))
    return None


def mgf_window(dist: InputDistribution, params: ChannelParams) -> float:
    """Upper end of the t-window lam / (lam r / a + 1) where a is the input MGF radius."""
    a = dist.mgf_radius()
    lam, r = params.lam, params.r
    if a <= 0:
        return 0.0
    return lam / (lam * r / a + 1.0) if math.isfinite(a) else lam


def ch_mgf(dist: InputDistribution, params: ChannelParams, t):
    """E[exp(t X_r)] = (1 - t/lam)^-alpha M_X(r t / (1 - t/lam))."""
    t = np.asarray(t, dtype=float)
    hi = mgf_window(dist, params)
    if np.any(t < 0) or np.any((t >= hi) & (t > 0)):
        raise DomainError(f"t must lie in [0, {hi:.6g}) for this input")
    lam, r = params.lam, params.r
    s = 1.0 - t / lam
    out = s ** (-params.alpha) * np.asarray(dist.mgf(r * t / s))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------------ estimators


def ch_conditional_expectation(records: ChannelRecords, g, bins: int | None = None) -> BinnedRegression:
    """Binned regression of g(records) on x_r; ``g`` is a callable or an array."""
    vals = g(records) if callable(g) else g
    vals = np.broadcast_to(np.asarray(vals, dtype=float), records.x_r.shape)
    return binned_regression(records.x_r, vals, bins or default_bin_count(len(records)))


def ch_jst_mc(dist: InputDistribution, params: ChannelParams, n: int, seed: int,
              bins: int | None = None) -> MonteCarloEstimate:
    """lam E[ E[sqrt(r X) V_r | X_r]^2 ] by binned regression on channel draws."""
    if params.r == 0:
        return MonteCarloEstimate(0.0, 0.0, n, seed)
    rec = ch_sample(dist, params, n, seed)
    g = np.sqrt(params.r * rec.x) * rec.v_r
    est, _ = mean_squared_regression(rec.x_r, g, bins or default_bin_count(n), seed)
    lam = params.lam
    return MonteCarloEstimate(lam * est.value, lam * est.std_error, est.n, seed)


class _ScaledDensity:
    """Density of X_r / c."""

    def __init__(self, marg: ChannelMarginal, c: float):
        self.marg, self.c = marg, c

    def log_pdf(self, y):
        return np.asarray(self.marg.log_pdf(self.c * np.asarray(y))) + math.log(self.c)

    def score(self, y):
        return self.c * np.asarray(self.marg.score(self.c * np.asarray(y)))


def _scaled_grid(g: QuadratureGrid, c: float) -> QuadratureGrid:
    return QuadratureGrid(g.nodes / c, g.weights / c, g.gauss_weights / c, g.lower / c, g.upper / c, g.tail_mass)


def ch_jst_quadrature(dist: InputDistribution, params: ChannelParams,
                      grids: ChannelGrids | None = None, route: str = "direct") -> float:
    """J_st(X_r) against Gamma(alpha, lam) from the marginal density and score.

    ``route="rescaled"`` evaluates the functional for X_r/(1+r) and maps it
    back through the exact scaling law; both routes agree to quadrature error.
    """
    if params.r == 0:
        return float(standardized_gamma_fisher_quadrature(dist, params.alpha, params.lam)) if not dist.is_point_mass else 0.0
    marg = ChannelMarginal(dist, params, grids)
    ug = marg.grids.u
    marg.check_accuracy(ug.nodes)
    a, lam, r = params.alpha, params.lam, params.r
    if route == "direct":
        return standardized_gamma_fisher_quadrature(marg, a, lam, ug)
    if route == "rescaled":
        c = 1.0 + r
        j = standardized_gamma_fisher_quadrature(_ScaledDensity(marg, c), a, lam, _scaled_grid(ug, c))
        mean_y = (a / lam + r * dist.mean) / c
        return jst_after_scaling(j, mean_y, a, lam, c)
    raise ValueError(f"unknown route '{route}'")


def ch_score_representation_check(dist: InputDistribution, params: ChannelParams, n: int, seed: int,
                                  bins: int | None = None) -> MonteCarloEstimate:
    """Mean-square gap between the gamma-score side and the binned estimation side.

    Per record the residual is sqrt(u)(rho(u) + lam - (alpha-1)/u) minus
    lam sqrt(r x) v_r; its binned conditional mean is squared and debiased.
    The quadrature side is interpolated from the output grid.
    """
    if params.r == 0:
        return MonteCarloEstimate(0.0, 0.0, n, seed)
    marg = ChannelMarginal(dist, params)
    ug = marg.grids.u
    lhs_nodes = marg.gamma_deviation(ug.nodes)
    spline = CubicSpline(np.sqrt(ug.nodes), lhs_nodes)
    rec = ch_sample(dist, params, n, seed)
    u = rec.x_r
    lhs = spline(np.sqrt(np.clip(u, ug.nodes[0], ug.nodes[-1])))
    resid = lhs - params.lam * np.sqrt(params.r * rec.x) * rec.v_r
    est, _ = mean_squared_regression(u, resid, bins or default_bin_count(n), seed)
    return est


# ------------------------------------------------------------------ information measures


def ch_mutual_information(dist: InputDistribution, params: ChannelParams,
                          grids: ChannelGrids | None = None) -> float:
    """I(X; X_r) by double quadrature of the log-likelihood ratio."""
    if params.r == 0 or dist.is_point_mass:
        return 0.0
    marg = ChannelMarginal(dist, params, grids)
    ug = marg.grids.u
    total = 0.0
    u_all, w_all = ug.nodes, ug.weights
    for i in range(0, u_all.size, _CHUNK):
        u = u_all[i:i + _CHUNK]
        lk, _ = _kernel_parts(params, marg.x_nodes[None, :], u[:, None])
        log_p = logsumexp(lk + marg._log_wx, axis=1)
        joint = np.exp(lk + marg._log_wx)
        total += float(w_all[i:i + _CHUNK] @ np.sum(joint * (lk - log_p[:, None]), axis=1))
    return total


def ch_relative_entropy(dist: InputDistribution, params: ChannelParams,
                        grids: ChannelGrids | None = None) -> float:
    """D(X_r || Gamma(alpha, lam/(1+r)))."""
    a, lam, r = params.alpha, params.lam, params.r
    ref = Gamma(a, lam / (1.0 + r))
    if r == 0:
        return 0.0  # X_0 ~ Gamma(alpha, lam) for every input
    marg = ChannelMarginal(dist, params, grids)
    ug = marg.grids.u
    ev = marg.evaluate(ug.nodes)
    if np.max(ev.rel_error) > HARD_REL_TOL:
        raise QuadratureAccuracyError("marginal density not resolved on the output grid")
    p = np.exp(ev.log_pdf)
    res = ug.integrate(p * (ev.log_pdf - np.asarray(ref.log_pdf(ug.nodes))))
    return float(res.check(HARD_REL_TOL, 1e-11, "relative entropy"))


def ch_mutual_information_mc(dist: InputDistribution, params: ChannelParams, n: int, seed: int,
                             stream: int = 0) -> MonteCarloEstimate:
    """I(X; X_r) as a Monte Carlo mean of ln k(X_r|X) - ln p(X_r).

    Needs an input whose output law is available in closed form.
    """
    out = closed_form_output(dist, params)
    if out is None:
        raise ValueError("Monte Carlo mutual information needs a gamma-type input with shape alpha")
    if params.r == 0:
        return MonteCarloEstimate(0.0, 0.0, n, seed)
    rec = ch_sample(dist, params, n, seed, stream)
    u = rec.x_r
    llr = _kernel_parts(params, rec.x, u)[0] - np.asarray(out.log_pdf(u))
    return mc_mean(llr, seed)
