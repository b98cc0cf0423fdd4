"""Catalogue of channel input laws.

Positive laws (gamma, exponential, gamma mixtures, lognormal, Pareto) feed the
quadratic gamma channel; the real-line laws (normal, affine images) and the
point mass serve the Gaussian baseline and deterministic-input experiments.
All objects are immutable; sampling takes an explicit seed and stream.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .quadrature import linear_grid, sqrt_grid
from .rng import make_rng, sample_gamma
from .specfun import DomainError, digamma_fn, log_gamma_fn

__all__ = [
    "InputDistribution",
    "Gamma",
    "GammaParams",
    "Exponential",
    "GammaMixture",
    "LogNormal",
    "Pareto",
    "Normal",
    "PointMass",
    "Affine",
    "SampleBatch",
    "sample",
    "log_pdf",
    "score",
    "moment",
    "gamma_relative_entropy_closed",
    "standardized",
    "check_moment_hypothesis",
    "MomentHypothesisError",
    "from_spec",
    "TAIL_EPS",
]

TAIL_EPS = 1e-12


class MomentHypothesisError(ValueError):
    """Input lacks the finite moments an identity check requires."""


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray = field(repr=False)
    seed: int
    count: int

    def __post_init__(self):
        self.values.setflags(write=False)


class InputDistribution(ABC):
    """Interface shared by every input law."""

    positive: bool = True

    @abstractmethod
    def log_pdf(self, x): ...

    @abstractmethod
    def score(self, x): ...

    @abstractmethod
    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray: ...

    @abstractmethod
    def moment(self, k: float) -> float: ...

    @abstractmethod
    def support_bounds(self, eps: float = TAIL_EPS) -> tuple[float, float]: ...

    @abstractmethod
    def to_spec(self) -> dict: ...

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float:
        return self.moment(2) - self.mean**2

    @property
    def is_point_mass(self) -> bool:
        return False

    @property
    def label(self) -> str:
        spec = self.to_spec()
        kind = spec.pop("kind")
        return kind + "(" + ",".join(f"{k}={v}" for k, v in spec.items()) + ")"

    @property
    def lower_edge(self) -> float | None:
        """Finite lower end of the support when the density may be singular there."""
        return None

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def mgf_radius(self) -> float:
        """Supremum a of t with E[exp(tX)] finite on (0, a)."""
        return 0.0

    def mgf(self, t):
        raise DomainError(f"{type(self).__name__} has no moment generating function on (0, a)")

    def scaled(self, c: float) -> "InputDistribution":
        """Law of c*X for c > 0."""
        return Affine(self, 0.0, c)

    def _check_positive_arg(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError(f"{type(self).__name__} density is supported on x > 0")
        return arr

    def quadrature_grid(self, panel_width: float | None = None, eps: float = TAIL_EPS, refine: int = 1):
        """Truncated grid covering all but ~2*eps of the mass.

        ``refine`` divides the default panel width when ``panel_width`` is not given.
        """
        lo, hi = self.support_bounds(eps)
        if self.positive:
            # start at the support edge: functionals such as E[X (c/X)^2] weigh the
            # left tail far more than the mass eps would suggest
            edge = self.lower_edge
            lo = lo if edge is None else edge
            t_span = math.sqrt(hi) - math.sqrt(lo)
            w = panel_width or t_span / (24 * refine)
            return sqrt_grid(lo, hi, w, min_panels=8, n_refine=0 if edge is None else 12, tail_mass=2 * eps)
        w = panel_width or (hi - lo) / (24 * refine)
        return linear_grid(lo, hi, w, min_panels=8, tail_mass=2 * eps)


def _ret(x, like):
    return float(x) if np.ndim(like) == 0 else x


@dataclass(frozen=True)
class Gamma(InputDistribution):
    """Gamma law with density rate^shape/Gamma(shape) x^(shape-1) e^(-rate x)."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("Gamma needs shape > 0 and rate > 0")

    @property
    def lower_edge(self):
        return 0.0

    def log_pdf(self, x):
        x = self._check_positive_arg(x)
        a, b = self.shape, self.rate
        out = a * math.log(b) - math.lgamma(a) + (a - 1) * np.log(x) - b * x
        return _ret(out, x)

    def score(self, x):
        x = self._check_positive_arg(x)
        return _ret((self.shape - 1) / x - self.rate, x)

    def draw(self, rng, n):
        return sample_gamma(rng, self.shape, self.rate, n)

    def moment(self, k):
        if k <= -self.shape:
            return math.inf
        return math.exp(gammaln(self.shape + k) - gammaln(self.shape) - k * math.log(self.rate))

    def support_bounds(self, eps=TAIL_EPS):
        d = stats.gamma(self.shape, scale=1.0 / self.rate)
        return float(d.ppf(eps)), float(d.isf(eps))

    def mgf_radius(self):
        return self.rate

    def mgf(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t >= self.rate):
            raise DomainError("gamma MGF requires t < rate")
        return _ret((1 - t / self.rate) ** (-self.shape), t)

    def scaled(self, c):
        return Gamma(self.shape, self.rate / c)

    def to_spec(self):
        return {"kind": "gamma", "shape": self.shape, "rate": self.rate}


GammaParams = Gamma


@dataclass(frozen=True)
class Exponential(Gamma):
    """Exponential law; identical to Gamma(1, rate)."""

    shape: float = field(default=1.0, init=False)
    rate: float = 1.0

    def scaled(self, c):
        return Exponential(self.rate / c)

    def to_spec(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class GammaMixture(InputDistribution):
    weights: tuple[float, ...]
    components: tuple[Gamma, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.components) or len(w) == 0:
            raise ValueError("mixture needs one weight per component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "components", tuple(self.components))

    def _log_parts(self, x):
        x = self._check_positive_arg(x)
        with np.errstate(divide="ignore"):
            lw = np.log(np.asarray(self.weights))
        parts = np.stack([lw_i + np.asarray(c.log_pdf(x)) for lw_i, c in zip(lw, self.components)])
        return x, parts

    @property
    def lower_edge(self):
        return 0.0

    def log_pdf(self, x):
        x, parts = self._log_parts(x)
        return _ret(logsumexp(parts, axis=0), x)

    def score(self, x):
        x, parts = self._log_parts(x)
        post = np.exp(parts - logsumexp(parts, axis=0))
        scores = np.stack([np.asarray(c.score(x)) for c in self.components])
        return _ret(np.sum(post * scores, axis=0), x)

    def draw(self, rng, n):
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        out = np.empty(n)
        for i, c in enumerate(self.components):
            sel = idx == i
            out[sel] = c.draw(rng, int(sel.sum()))
        return out

    def moment(self, k):
        return float(sum(w * c.moment(k) for w, c in zip(self.weights, self.components)))

    def support_bounds(self, eps=TAIL_EPS):
        b = [c.support_bounds(eps) for c in self.components]
        return min(lo for lo, _ in b), max(hi for _, hi in b)

    def mgf_radius(self):
        return min(c.rate for c in self.components)

    def mgf(self, t):
        return sum(w * np.asarray(c.mgf(t)) for w, c in zip(self.weights, self.components))

    def scaled(self, c):
        return GammaMixture(self.weights, tuple(comp.scaled(c) for comp in self.components))

    def to_spec(self):
        return {
            "kind": "gamma_mixture",
            "weights": list(self.weights),
            "shapes": [c.shape for c in self.components],
            "rates": [c.rate for c in self.components],
        }


@dataclass(frozen=True)
class LogNormal(InputDistribution):
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("LogNormal needs sigma > 0")

    @property
    def lower_edge(self):
        return 0.0

    def log_pdf(self, x):
        x = self._check_positive_arg(x)
        lx = np.log(x)
        out = -lx - math.log(self.sigma) - 0.5 * math.log(2 * math.pi) - 0.5 * ((lx - self.mu) / self.sigma) ** 2
        return _ret(out, x)

    def score(self, x):
        x = self._check_positive_arg(x)
        return _ret(-(1.0 + (np.log(x) - self.mu) / self.sigma**2) / x, x)

    def draw(self, rng, n):
        return np.exp(self.mu + self.sigma * rng.standard_normal(n))

    def moment(self, k):
        return math.exp(k * self.mu + 0.5 * (k * self.sigma) ** 2)

    def support_bounds(self, eps=TAIL_EPS):
        z = stats.norm.isf(eps)
        return math.exp(self.mu - self.sigma * z), math.exp(self.mu + self.sigma * z)

    def scaled(self, c):
        return LogNormal(self.mu + math.log(c), self.sigma)

    def to_spec(self):
        return {"kind": "lognormal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Pareto(InputDistribution):
    """Heavy-tailed law x_m^a a / x^(a+1) on x > x_m; moments of order >= a diverge."""

    scale: float
    shape: float

    @property
    def lower_edge(self):
        return self.scale

    def log_pdf(self, x):
        x = self._check_positive_arg(x)
        out = np.where(
            x > self.scale,
            math.log(self.shape) + self.shape * math.log(self.scale) - (self.shape + 1) * np.log(x),
            -np.inf,
        )
        return _ret(out, x)

    def score(self, x):
        x = self._check_positive_arg(x)
        return _ret(-(self.shape + 1) / x, x)

    def draw(self, rng, n):
        return self.scale * (1.0 - rng.random(n)) ** (-1.0 / self.shape)

    def moment(self, k):
        if k >= self.shape:
            return math.inf
        return self.shape * self.scale**k / (self.shape - k)

    def support_bounds(self, eps=TAIL_EPS):
        return self.scale, self.scale * eps ** (-1.0 / self.shape)

    def scaled(self, c):
        return Pareto(self.scale * c, self.shape)

    def to_spec(self):
        return {"kind": "pareto", "scale": self.scale, "shape": self.shape}


@dataclass(frozen=True)
class Normal(InputDistribution):
    mu: float = 0.0
    sigma: float = 1.0
    positive = False

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        return _ret(-0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2 * math.pi), x)

    def score(self, x):
        x = np.asarray(x, dtype=float)
        return _ret(-(x - self.mu) / self.sigma**2, x)

    def draw(self, rng, n):
        return self.mu + self.sigma * rng.standard_normal(n)

    def moment(self, k):
        if k != int(k):
            raise DomainError("normal moments are defined here for integer k only")
        return float(stats.norm(self.mu, self.sigma).moment(int(k)))

    def support_bounds(self, eps=TAIL_EPS):
        z = stats.norm.isf(eps)
        return self.mu - z * self.sigma, self.mu + z * self.sigma

    def mgf_radius(self):
        return math.inf

    def mgf(self, t):
        t = np.asarray(t, dtype=float)
        return _ret(np.exp(self.mu * t + 0.5 * (self.sigma * t) ** 2), t)

    def scaled(self, c):
        return Normal(self.mu * c, self.sigma * c)

    def to_spec(self):
        return {"kind": "normal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class PointMass(InputDistribution):
    """Deterministic input X = value (no density)."""

    value: float

    @property
    def positive(self):
        return self.value > 0

    @property
    def is_point_mass(self):
        return True

    def log_pdf(self, x):
        raise DomainError("a point mass has no Lebesgue density")

    def score(self, x):
        raise DomainError("a point mass has no score")

    def draw(self, rng, n):
        return np.full(n, float(self.value))

    def moment(self, k):
        return float(self.value) ** k

    def support_bounds(self, eps=TAIL_EPS):
        return float(self.value), float(self.value)

    def mgf_radius(self):
        return math.inf

    def mgf(self, t):
        t = np.asarray(t, dtype=float)
        return _ret(np.exp(self.value * t), t)

    def scaled(self, c):
        return PointMass(self.value * c)

    def to_spec(self):
        return {"kind": "point", "value": self.value}


@dataclass(frozen=True)
class Affine(InputDistribution):
    """Law of loc + scale * X for a base law X."""

    base: InputDistribution
    loc: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("Affine needs scale > 0")

    @property
    def positive(self):
        return self.base.positive and self.loc >= 0

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.loc) / self.scale
        out = np.full(z.shape, -np.inf)
        ok = z > 0 if self.base.positive else np.ones(z.shape, bool)
        out[ok] = np.asarray(self.base.log_pdf(z[ok])) - math.log(self.scale)
        return _ret(out, x)

    def score(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.loc) / self.scale
        return _ret(np.asarray(self.base.score(z)) / self.scale, x)

    def draw(self, rng, n):
        return self.loc + self.scale * self.base.draw(rng, n)

    def moment(self, k):
        if k == int(k) and k >= 0:
            # binomial expansion in the base moments
            k = int(k)
            return float(sum(
                math.comb(k, j) * self.loc ** (k - j) * self.scale**j * (self.base.moment(j) if j else 1.0)
                for j in range(k + 1)
            ))
        grid = self.quadrature_grid()
        return float(grid.integrate(np.abs(grid.nodes) ** k * self.pdf(grid.nodes)).value)

    def support_bounds(self, eps=TAIL_EPS):
        lo, hi = self.base.support_bounds(eps)
        return self.loc + self.scale * lo, self.loc + self.scale * hi

    def quadrature_grid(self, panel_width=None, eps=TAIL_EPS, refine=1):
        # follow the base layout so sqrt-type endpoints stay resolved;
        # panel_width is measured in the base law's grid coordinate
        g = self.base.quadrature_grid(panel_width, eps, refine)
        from .quadrature import QuadratureGrid

        return QuadratureGrid(
            self.loc + self.scale * g.nodes, self.scale * g.weights, self.scale * g.gauss_weights,
            self.loc + self.scale * g.lower, self.loc + self.scale * g.upper, g.tail_mass,
        )

    def mgf_radius(self):
        return self.base.mgf_radius() / self.scale

    def mgf(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(self.loc * t) * np.asarray(self.base.mgf(self.scale * t))

    def scaled(self, c):
        return Affine(self.base, self.loc * c, self.scale * c)

    def to_spec(self):
        return {"kind": "affine", "loc": self.loc, "scale": self.scale, "base": self.base.to_spec()}


# ---------------------------------------------------------------- operations


def sample(dist: InputDistribution, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """n i.i.d. draws, reproducible from (seed, stream)."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    values = dist.draw(make_rng(seed, 0x5A, stream), int(n))
    return SampleBatch(values, seed, int(n))


def log_pdf(dist: InputDistribution, x):
    return dist.log_pdf(x)


def score(dist: InputDistribution, x):
    return dist.score(x)


def moment(dist: InputDistribution, k: float) -> float:
    """E[X^k]; +inf when divergent."""
    if k <= 0:
        raise ValueError("moment order must be positive")
    return dist.moment(k)


def check_moment_hypothesis(dist: InputDistribution, alpha: float) -> None:
    """Refuse inputs without finite alpha+4 moments."""
    m = dist.moment(alpha + 4)
    if not math.isfinite(m):
        raise MomentHypothesisError(
            f"input {dist.label} violates the hypothesis of finite alpha+4 moments (alpha={alpha})"
        )


def gamma_relative_entropy_closed(p: Gamma, q: Gamma) -> float:
    """D(Gamma(p.shape, p.rate) || Gamma(q.shape, q.rate)) in nats."""
    a1, b1, a0, b0 = p.shape, p.rate, q.shape, q.rate
    return float(
        (a1 - a0) * digamma_fn(a1)
        - log_gamma_fn(a1)
        + log_gamma_fn(a0)
        + a0 * (math.log(b1) - math.log(b0))
        + a1 * (b0 - b1) / b1
    )


def standardized(dist: InputDistribution) -> InputDistribution:
    """Affine image with mean 0 and variance 1."""
    if isinstance(dist, Normal):
        return Normal(0.0, 1.0)
    m, v = dist.mean, dist.variance
    s = math.sqrt(v)
    base = dist.base if isinstance(dist, Affine) else dist
    if isinstance(dist, Affine):
        return Affine(base, (dist.loc - m) / s, dist.scale / s)
    return Affine(base, -m / s, 1.0 / s)


def from_spec(spec: Mapping[str, Any]) -> InputDistribution:
    """Build a distribution from a ``{"kind": ..., params}`` mapping."""
    spec = dict(spec)
    kind = str(spec.pop("kind", "")).lower()
    f = lambda key: float(spec[key])  # noqa: E731
    try:
        if kind == "gamma":
            return Gamma(f("shape"), f("rate"))
        if kind == "exponential":
            return Exponential(f("rate"))
        if kind == "gamma_mixture":
            shapes, rates = spec["shapes"], spec["rates"]
            comps = tuple(Gamma(float(a), float(b)) for a, b in zip(shapes, rates))
            return GammaMixture(tuple(float(w) for w in spec["weights"]), comps)
        if kind == "lognormal":
            return LogNormal(f("mu"), f("sigma"))
        if kind == "pareto":
            return Pareto(f("scale"), f("shape"))
        if kind == "normal":
            return Normal(f("mu"), f("sigma"))
        if kind == "point":
            return PointMass(f("value"))
        if kind == "affine":
            return Affine(from_spec(spec["base"]), f("loc"), f("scale"))
    except KeyError as exc:
        raise ValueError(f"distribution '{kind}' is missing parameter {exc}") from None
    raise ValueError(f"unknown distribution kind '{kind}'")
