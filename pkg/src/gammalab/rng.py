"""Counter-based random streams keyed by (seed, stream id).

Every estimator draws from its own Philox stream so that parallel jobs and
re-runs reproduce the same numbers regardless of scheduling order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng", "sample_gamma"]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and an arbitrary stream path."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)])
    return np.random.Generator(np.random.Philox(key))


def sample_gamma(rng: np.random.Generator, shape: float, rate: float, n: int) -> np.ndarray:
    """Gamma(shape, rate) draws; shape 0 is the point mass at 0.

    Shapes below 1 use Gamma(a) = Gamma(a+1) * U**(1/a).
    """
    if shape < 0 or rate <= 0:
        raise ValueError("gamma needs shape >= 0 and rate > 0")
    if shape == 0:
        return np.zeros(n)
    if shape < 1:
        g = rng.standard_gamma(shape + 1.0, size=n)
        u = rng.random(n)
        return g * u ** (1.0 / shape) / rate
    return rng.standard_gamma(shape, size=n) / rate
