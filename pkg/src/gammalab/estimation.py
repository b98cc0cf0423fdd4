"""Monte Carlo bookkeeping, binned regression and numerical differentiation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "EstimatorAccuracyError",
    "MonteCarloEstimate",
    "mc_mean",
    "BinnedRegression",
    "default_bin_count",
    "binned_regression",
    "mean_squared_regression",
    "fd_step",
    "richardson_derivative",
    "MIN_PER_BIN",
]

MIN_PER_BIN = 50


class EstimatorAccuracyError(RuntimeError):
    """An estimator cannot meet its accuracy preconditions (e.g. sparse bins)."""


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    n: int
    seed: int

    def within(self, target: float, k: float = 3.0, tol: float = 0.0) -> bool:
        return abs(self.value - target) <= tol + k * self.std_error

    def __float__(self) -> float:
        return float(self.value)


def mc_mean(values, seed: int) -> MonteCarloEstimate:
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise ValueError("empty sample")
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MonteCarloEstimate(float(v.mean()), se, n, seed)


def default_bin_count(n: int) -> int:
    return int(min(400, max(30, math.ceil(n ** (1.0 / 3.0)))))


@dataclass(frozen=True, eq=False)
class BinnedRegression:
    """Piecewise-constant estimate of E[g | u] on equal-mass bins."""

    edges: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    counts: np.ndarray

    def bin_index(self, u) -> np.ndarray:
        idx = np.searchsorted(self.edges, np.asarray(u, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.means.size - 1)

    def __call__(self, u):
        return self.means[self.bin_index(u)]

    def std_error(self, u):
        return self.std_errors[self.bin_index(u)]


def binned_regression(u, g, bins: int) -> BinnedRegression:
    u = np.asarray(u, dtype=float)
    g = np.broadcast_to(np.asarray(g, dtype=float), u.shape)
    if u.size == 0:
        raise ValueError("no records to regress")
    if bins < 10:
        raise ValueError("at least 10 bins are required")
    if u.size < bins * MIN_PER_BIN:
        raise EstimatorAccuracyError(
            f"{u.size} records cannot fill {bins} bins with >= {MIN_PER_BIN} records each"
        )
    order = np.argsort(u, kind="stable")
    us, gs = u[order], g[order]
    starts = (np.arange(bins) * u.size) // bins
    counts = np.diff(np.append(starts, u.size))
    sums = np.add.reduceat(gs, starts)
    means = sums / counts
    centered = gs - np.repeat(means, counts)
    var = np.add.reduceat(centered * centered, starts) / np.maximum(counts - 1, 1)
    edges = np.empty(bins + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    edges[1:-1] = 0.5 * (us[starts[1:] - 1] + us[starts[1:]])
    return BinnedRegression(edges, means, np.sqrt(var / counts), counts)


def mean_squared_regression(u, g, bins: int, seed: int = 0) -> tuple[MonteCarloEstimate, BinnedRegression]:
    """Estimate E[ E[g|u]^2 ] by equal-mass binning.

    Each squared bin mean is corrected by its sampling variance.  The standard
    error combines the influence function 2 m(u)(g - m(u)) + m(u)^2 with the
    chi-square fluctuation of the squared bin means, which dominates when
    E[g|u] is close to 0.
    """
    reg = binned_regression(u, g, bins)
    m2 = reg.means**2 - reg.std_errors**2
    n = reg.counts.sum()
    value = float(np.sum(reg.counts * m2) / n)
    g = np.broadcast_to(np.asarray(g, dtype=float), np.shape(u))
    m = reg(u)
    infl = 2.0 * m * (g - m) + m * m
    p = reg.counts / n
    var_sq = np.sum(p * p * 2.0 * reg.std_errors**4)
    se = float(math.sqrt(infl.var(ddof=1) / n + var_sq))
    return MonteCarloEstimate(value, se, int(n), seed), reg


def fd_step(r: float) -> float:
    """Central-difference step: max(1e-3, 1e-2 r), kept inside (0, r/2]."""
    h = max(1e-3, 1e-2 * r)
    return min(h, 0.5 * r) if r > 0 else h


def richardson_derivative(f: Callable[[float], float], r: float, h: float | None = None):
    """Central difference with one Richardson level; returns (value, error)."""
    h = fd_step(r) if h is None else h
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    d2 = (f(r + h / 2) - f(r - h / 2)) / h
    return (4 * d2 - d1) / 3, abs(d2 - d1) / 3
