"""Composite Gauss-Kronrod grids on truncated domains.

A :class:`QuadratureGrid` is an immutable node/weight set built from 15-point
Kronrod panels, each carrying the embedded 7-point Gauss rule.  The panel-wise
difference between the two rules is the self-reported error estimate.  Grids
may be laid out uniformly in ``x`` or in ``t = sqrt(x)``; the latter removes
``x**(a-1)`` endpoint behaviour of gamma-type densities with ``a >= 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "QuadratureAccuracyError",
    "QuadratureGrid",
    "QuadResult",
    "linear_grid",
    "sqrt_grid",
    "gauss_legendre_nodes",
    "DEFAULT_REL_TOL",
    "HARD_REL_TOL",
]

DEFAULT_REL_TOL = 1e-9
HARD_REL_TOL = 1e-6

# QUADPACK G7-K15 abscissae on [-1, 1] (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights sit on the odd-indexed Kronrod abscissae.
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _reference_rule():
    x = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    wk = np.concatenate([_WGK[:-1], _WGK[::-1]])
    wg_half = np.zeros(8)
    wg_half[1::2] = _WG
    wg = np.concatenate([wg_half[:-1], wg_half[::-1]])
    order = np.argsort(x)
    return x[order], wk[order], wg[order]


_X15, _WK15, _WG15 = _reference_rule()
PANEL_SIZE = 15


class QuadratureAccuracyError(RuntimeError):
    """Self-reported quadrature error exceeds the hard tolerance."""


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float

    def check(self, rel_tol: float = HARD_REL_TOL, abs_tol: float = 1e-12, what: str = "integral"):
        bad = np.asarray(self.error) > rel_tol * np.abs(self.value) + abs_tol
        if np.any(bad):
            raise QuadratureAccuracyError(
                f"{what}: error estimate {np.max(self.error):.3g} exceeds tolerance "
                f"(value {np.max(np.abs(self.value)):.6g}, rel_tol {rel_tol:g})"
            )
        return self.value


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and weights (Jacobian included) of a composite G7-K15 rule."""

    nodes: np.ndarray
    weights: np.ndarray
    gauss_weights: np.ndarray
    lower: float
    upper: float
    tail_mass: float = 0.0

    @property
    def n_panels(self) -> int:
        return self.nodes.size // PANEL_SIZE

    def __len__(self) -> int:
        return self.nodes.size

    def _panels(self, values):
        v = np.asarray(values, dtype=float)
        return v.reshape(v.shape[:-1] + (self.n_panels, PANEL_SIZE))

    def integrate(self, values) -> QuadResult:
        """Integrate samples taken at ``self.nodes`` (last axis)."""
        v = self._panels(values)
        wk = self.weights.reshape(self.n_panels, PANEL_SIZE)
        wg = self.gauss_weights.reshape(self.n_panels, PANEL_SIZE)
        k = np.sum(v * wk, axis=-1)
        g = np.sum(v * wg, axis=-1)
        return QuadResult(np.sum(k, axis=-1), np.sum(np.abs(k - g), axis=-1))

    def log_integrate(self, log_values) -> QuadResult:
        """Integrate ``exp(log_values)``; returns the log of the integral.

        The error field is the relative error estimate of the integral.
        """
        lv = np.asarray(log_values, dtype=float)
        with np.errstate(divide="ignore"):
            lwk = np.log(self.weights)
        log_k = logsumexp(lv + lwk, axis=-1)
        shift = np.where(np.isfinite(log_k), log_k, 0.0)[..., None]
        scaled = np.exp(lv - shift)
        pk = np.sum(self._panels(scaled) * self.weights.reshape(self.n_panels, PANEL_SIZE), axis=-1)
        pg = np.sum(self._panels(scaled) * self.gauss_weights.reshape(self.n_panels, PANEL_SIZE), axis=-1)
        rel = np.sum(np.abs(pk - pg), axis=-1)
        return QuadResult(log_k, rel)

    def restricted(self, mask_panels: np.ndarray) -> "QuadratureGrid":
        keep = np.repeat(np.asarray(mask_panels, bool), PANEL_SIZE)
        return QuadratureGrid(
            self.nodes[keep], self.weights[keep], self.gauss_weights[keep],
            self.lower, self.upper, self.tail_mass,
        )


def _panels_from_breaks(tb: np.ndarray):
    tb = np.asarray(tb, dtype=float)
    a, b = tb[:-1, None], tb[1:, None]
    half = 0.5 * (b - a)
    t = (0.5 * (a + b) + half * _X15).ravel()
    wk = (half * _WK15).ravel()
    wg = (half * _WG15).ravel()
    return t, wk, wg


def _uniform_breaks(lo: float, hi: float, width: float, min_panels: int = 1):
    n = max(min_panels, int(np.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, n + 1)


def linear_grid(lower: float, upper: float, panel_width: float, *, min_panels: int = 4,
                tail_mass: float = 0.0, breaks=None) -> QuadratureGrid:
    """Panels uniform in x (optionally with explicit extra breakpoints)."""
    if not upper > lower:
        raise ValueError("empty integration interval")
    tb = _uniform_breaks(lower, upper, panel_width, min_panels)
    if breaks is not None:
        extra = [b for b in np.atleast_1d(breaks) if lower < b < upper]
        tb = np.unique(np.concatenate([tb, extra]))
    t, wk, wg = _panels_from_breaks(tb)
    return QuadratureGrid(t, wk, wg, float(lower), float(upper), tail_mass)


def sqrt_grid(lower: float, upper: float, panel_width: float, *, min_panels: int = 4,
              n_refine: int = 0, tail_mass: float = 0.0) -> QuadratureGrid:
    """Panels uniform in t = sqrt(x); weights carry the Jacobian 2t.

    ``n_refine`` adds geometrically shrinking panels toward ``t = sqrt(lower)``
    (useful when the integrand has a log or fractional-power endpoint).
    """
    if lower < 0 or not upper > lower:
        raise ValueError("sqrt_grid needs 0 <= lower < upper")
    t_lo, t_hi = np.sqrt(lower), np.sqrt(upper)
    tb = _uniform_breaks(t_lo, t_hi, panel_width, min_panels)
    if n_refine:
        first = tb[1]
        geo = t_lo + (first - t_lo) * 0.5 ** np.arange(n_refine, 0, -1)
        tb = np.concatenate([[t_lo], geo, tb[1:]])
    t, wk, wg = _panels_from_breaks(tb)
    jac = 2.0 * t
    return QuadratureGrid(t * t, wk * jac, wg * jac, float(lower), float(upper), tail_mass)


def gauss_legendre_nodes(lower: float, upper: float, n: int, *, sqrt: bool = False):
    """Plain n-point Gauss-Legendre nodes/weights, optionally in t = sqrt(x)."""
    z, w = np.polynomial.legendre.leggauss(n)
    if sqrt:
        t_lo, t_hi = np.sqrt(lower), np.sqrt(upper)
        t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * z
        return t * t, w * 0.5 * (t_hi - t_lo) * 2.0 * t
    x = 0.5 * (lower + upper) + 0.5 * (upper - lower) * z
    return x, w * 0.5 * (upper - lower)
