"""Proximal operators, projections, and the brute-force oracle that certifies them.

Every prox here evaluates ``argmin_y tau*g(y) + 0.5*||x - y||^2`` for its
particular ``g`` in closed form.  ``prox_oracle_separable`` solves the same
problem for separable ``g`` by golden-section search and is used in tests as
an implementation-independent reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DimensionMismatchError, NonFiniteError, as_vector

__all__ = [
    "ProxHandle",
    "ball_indicator",
    "box_indicator",
    "l1_penalty",
    "project_ball",
    "project_box",
    "prox_l1",
    "prox_oracle_separable",
    "prox_zero",
    "zero_function",
]

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def prox_l1(x: np.ndarray, tau: float) -> np.ndarray:
    """Soft-threshold each coordinate by ``tau``: sgn(x) * max(0, |x| - tau).

    A coordinate with ``|x_i| == tau`` maps to exactly 0.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(0.0, np.abs(x) - tau)


def project_ball(x: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Project onto the closed ball of the given center and radius.

    Interior points are returned unchanged.  Exterior points are rescaled
    radially, then settled so the output is a fixed point of the projection
    itself: rounding can land the scaled point an ulp outside the ball, and
    without the settling pass a second projection would move it again.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    if x.shape != center.shape:
        raise DimensionMismatchError("x and center must share a dimension")
    d = x - center
    n = math.sqrt(float(d @ d))
    if n <= radius:
        return x.copy()
    p = center + (radius / n) * d
    for _ in range(4):
        d = p - center
        n = math.sqrt(float(d @ d))
        if n <= radius:
            break
        q = center + (radius / n) * d
        if np.array_equal(q, p):
            break
        p = q
    return p


def project_box(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Clamp componentwise to ``[lo, hi]``."""
    x = np.asarray(x, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if x.shape != lo.shape or x.shape != hi.shape:
        raise DimensionMismatchError("x, lo, hi must share a dimension")
    if np.any(lo > hi):
        raise ValueError("box bounds require lo <= hi componentwise")
    return np.clip(x, lo, hi)


def prox_zero(x: np.ndarray) -> np.ndarray:
    """Prox of the zero function: the identity."""
    return np.asarray(x, dtype=float).copy()


def prox_oracle_separable(
    g_1d: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    tau: float | np.ndarray,
    width_tol: float = 1e-10,
) -> np.ndarray:
    """Brute-force prox of a separable convex term, one coordinate at a time.

    Minimizes ``tau*g_1d(y) + 0.5*(x_i - y)**2`` by golden-section search on
    ``[x_i - 10*tau*(1+|x_i|), x_i + 10*tau*(1+|x_i|)]`` until every bracket
    is narrower than ``width_tol``.  ``g_1d`` must be convex on that interval
    and is applied elementwise to arrays; ``tau`` may be a scalar or a
    per-coordinate array.

    Deliberately closed-form-free so it can certify the specialized proxes
    above.  Brackets are narrowed by comparing objective *differences* in a
    factored form: evaluating the two objectives separately and subtracting
    loses the comparison in their shared baseline once the bracket is tiny,
    flooring the attainable accuracy near sqrt(eps); the factored difference
    resolves minimizers to the bracket width itself.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    x = np.asarray(x, dtype=float)

    def eval_g(y: np.ndarray) -> np.ndarray:
        g = np.asarray(g_1d(y), dtype=float)
        if not np.isfinite(g).all():
            raise NonFiniteError("g_1d returned NaN or Inf on the search interval")
        return g

    def objective_gap(c: np.ndarray, d: np.ndarray) -> np.ndarray:
        # sign of [tau g(c) + (x-c)^2/2] - [tau g(d) + (x-d)^2/2], with the
        # quadratic part factored so the shared baseline never cancels
        return tau * (eval_g(c) - eval_g(d)) + 0.5 * (d - c) * ((x - c) + (x - d))

    half = 10.0 * tau * (1.0 + np.abs(x))
    a = x - half
    b = x + half
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    while np.max(b - a) > width_tol:
        left = objective_gap(c, d) < 0
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        cand_c = b - _INV_GOLDEN * (b - a)
        cand_d = a + _INV_GOLDEN * (b - a)
        c, d = np.where(left, cand_c, d), np.where(left, c, cand_d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class ProxHandle:
    """A named, parameterized proximal map usable as ``MviProblem.prox``.

    ``kind`` is one of ``l1``, ``ball_indicator``, ``box_indicator``,
    ``zero``.  Calling the handle as ``handle(tau, x)`` evaluates the prox of
    the underlying term scaled by ``tau``.
    """

    kind: str
    fn: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, tau: float, x: np.ndarray) -> np.ndarray:
        return self.fn(tau, x)


def l1_penalty(weight: float = 1.0) -> ProxHandle:
    """Handle for ``weight * ||.||_1``; prox soft-thresholds at ``tau*weight``."""
    if not weight > 0:
        raise ValueError("weight must be positive")
    return ProxHandle("l1", lambda tau, x: prox_l1(x, tau * weight))


def ball_indicator(center: np.ndarray, radius: float) -> ProxHandle:
    """Handle for the indicator of a ball; prox is the projection for any tau."""
    center = as_vector(center)
    if not radius > 0:
        raise ValueError("radius must be positive")
    return ProxHandle("ball_indicator", lambda tau, x: project_ball(x, center, radius))


def box_indicator(lo: np.ndarray, hi: np.ndarray) -> ProxHandle:
    """Handle for the indicator of a box; prox is the componentwise clamp."""
    lo = as_vector(lo)
    hi = as_vector(hi)
    if lo.shape != hi.shape:
        raise DimensionMismatchError("lo and hi must share a dimension")
    if np.any(lo > hi):
        raise ValueError("box bounds require lo <= hi componentwise")
    return ProxHandle("box_indicator", lambda tau, x: project_box(x, lo, hi))


def zero_function() -> ProxHandle:
    """Handle for g == 0; prox is the identity."""
    return ProxHandle("zero", lambda tau, x: prox_zero(x))
