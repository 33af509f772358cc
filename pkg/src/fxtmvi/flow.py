"""Right-hand sides of the nominal and modified dynamics, and the solve loop.

The discrete iteration is plain forward Euler::

    x_{k+1} = x_k + eta * rhs(x_k)

where the nominal right-hand side is ``-kappa (x - y(x))`` and the modified
one rescales the same direction by a residual-dependent gain that blows up
sublinearly near the solution and grows superlinearly far from it.  That
gain is what turns asymptotic convergence into convergence inside a fixed
step budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionMismatchError,
    DiscretizationParams,
    FlowParams,
    IterateRecord,
    MviProblem,
    NonFiniteError,
    RunLog,
    as_vector,
)

__all__ = [
    "ModifiedRhs",
    "NominalRhs",
    "euler_step",
    "modified_rhs",
    "nominal_rhs",
    "prox_grad_map",
    "residual_gain",
    "solve",
]


@dataclass(frozen=True)
class NominalRhs:
    """Constant-gain dynamics: ``dx/dt = -kappa (x - y(x))``."""

    kappa: float
    lam: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.lam > 0:
            raise ValueError("lam must be positive")


@dataclass(frozen=True)
class ModifiedRhs:
    """Residual-rescaled dynamics with the fixed-time gain."""

    params: FlowParams


def prox_grad_map(problem: MviProblem, lam: float, x: np.ndarray) -> np.ndarray:
    """One prox-gradient application: ``prox(lam, x - lam F(x))``.

    Fixed points of this map are exactly the problem's solutions.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    x = np.asarray(x, dtype=float)
    fx = np.asarray(problem.operator(x), dtype=float)
    if fx.shape != x.shape:
        raise DimensionMismatchError("operator output dimension differs from input")
    y = np.asarray(problem.prox(lam, x - lam * fx), dtype=float)
    if not np.isfinite(y).all():
        raise NonFiniteError("prox-gradient map produced NaN or Inf")
    return y


def residual_gain(
    x: np.ndarray, y: np.ndarray, params: FlowParams, fix_threshold: float
) -> float:
    """Gain of the modified dynamics at residual ``r = ||x - y||``.

    Returns ``kappa1 r^(alpha1-1) + kappa2 r^(alpha2-1)``, or exactly 0 when
    ``r < fix_threshold`` (the state counts as a fixed point of the
    prox-gradient map, where the dynamics must vanish).
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = math.sqrt(float(d @ d))
    if r < fix_threshold:
        return 0.0
    return params.kappa1 * r ** (params.alpha1 - 1.0) + params.kappa2 * r ** (
        params.alpha2 - 1.0
    )


def modified_rhs(
    problem: MviProblem, params: FlowParams, fix_threshold: float, x: np.ndarray
) -> np.ndarray:
    """Value of the modified right-hand side at ``x``.

    The magnitude equals ``kappa1 r^alpha1 + kappa2 r^alpha2`` with
    ``r = ||x - y(x)||``, vanishing continuously as ``r -> 0``.
    """
    x = np.asarray(x, dtype=float)
    y = prox_grad_map(problem, params.lam, x)
    gain = residual_gain(x, y, params, fix_threshold)
    return -gain * (x - y)


def nominal_rhs(
    problem: MviProblem, kappa: float, lam: float, x: np.ndarray
) -> np.ndarray:
    """Value of the constant-gain right-hand side at ``x``."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    x = np.asarray(x, dtype=float)
    y = prox_grad_map(problem, lam, x)
    return -kappa * (x - y)


def euler_step(x: np.ndarray, eta: float, rhs_value: np.ndarray) -> np.ndarray:
    """One forward-Euler update ``x + eta * rhs_value``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    x = np.asarray(x, dtype=float)
    rhs_value = np.asarray(rhs_value, dtype=float)
    if x.shape != rhs_value.shape:
        raise DimensionMismatchError("state and rhs dimensions differ")
    out = x + eta * rhs_value
    if not np.isfinite(out).all():
        raise NonFiniteError("forward-Euler step produced NaN or Inf")
    return out


def _record(k, eta, residual, x, reference, with_state) -> IterateRecord:
    state = x.copy() if with_state else None
    if reference is None:
        return IterateRecord(k=k, t=eta * k, residual=residual, state=state)
    d = x - reference
    err = math.sqrt(float(d @ d))
    return IterateRecord(
        k=k, t=eta * k, residual=residual, error=err,
        lyapunov=0.5 * err * err, state=state,
    )


def solve(
    problem: MviProblem,
    rhs: NominalRhs | ModifiedRhs,
    disc: DiscretizationParams,
    x0: np.ndarray,
    record_every: int = 100,
    record_states: bool = False,
    clamp_step: float | None = None,
) -> RunLog:
    """Iterate forward Euler from ``x0`` until a termination condition fires.

    Termination, checked in this order at every iterate:

    - ``fixed_point``: residual below ``disc.fix_threshold``
    - ``residual_met``: residual below ``disc.stop_residual``
    - ``step_cap``: ``disc.max_steps`` reached
    - ``stalled``: the update underflowed and the state froze bitwise, so
      every future iterate would repeat the current one

    Every ``record_every``-th iterate is logged plus the final one; error
    and Lyapunov columns are filled when the problem carries a reference
    solution.  The first and final records always include state snapshots.
    ``clamp_step``, when given, rescales any update longer than that bound
    (a safeguard for aggressively large ``eta``; off by default).

    Raises ``NonFiniteError`` as soon as NaN or Inf contaminates the state,
    identifying the last good step.
    """
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    if clamp_step is not None and not clamp_step > 0:
        raise ValueError("clamp_step must be positive when given")
    x = np.array(as_vector(x0))

    operator = problem.operator
    prox = problem.prox
    reference = problem.reference_solution
    if reference is not None and reference.shape != x.shape:
        raise DimensionMismatchError("reference solution dimension differs from x0")

    if isinstance(rhs, ModifiedRhs):
        fp = rhs.params
        lam, kappa1, kappa2 = fp.lam, fp.kappa1, fp.kappa2
        pow1, pow2 = fp.alpha1 - 1.0, fp.alpha2 - 1.0
        nominal_gain = None
    elif isinstance(rhs, NominalRhs):
        lam = rhs.lam
        nominal_gain = rhs.kappa
    else:
        raise TypeError(f"unsupported rhs kind: {rhs!r}")

    eta = disc.eta
    fix = disc.fix_threshold
    stop = disc.stop_residual
    max_steps = disc.max_steps

    records: list[IterateRecord] = []
    k = 0
    termination = None
    last_residual = None
    while True:
        fx = np.asarray(operator(x), dtype=float)
        if fx.shape != x.shape:
            raise DimensionMismatchError(
                "operator output dimension differs from state"
            )
        y = np.asarray(prox(lam, x - lam * fx), dtype=float)
        d = x - y
        r = math.sqrt(float(d @ d))
        if not math.isfinite(r):
            raise NonFiniteError(
                f"non-finite state at step {k} (last good step {k - 1})", step=k
            )
        last_residual = r
        if k % record_every == 0:
            # first record always keeps the state so logs retain x0
            records.append(_record(k, eta, r, x, reference, record_states or k == 0))
        if r < fix:
            termination = "fixed_point"
        elif r < stop:
            termination = "residual_met"
        elif k >= max_steps:
            termination = "step_cap"
        if termination is not None:
            break
        if nominal_gain is not None:
            gain = nominal_gain
        else:
            gain = kappa1 * r**pow1 + kappa2 * r**pow2
        scale = eta * gain
        if clamp_step is not None and scale * r > clamp_step:
            scale = clamp_step / r
        x_next = x - scale * d
        if not np.isfinite(x_next).all():
            raise NonFiniteError(
                f"non-finite state at step {k + 1} (last good step {k})", step=k + 1
            )
        if np.array_equal(x_next, x):
            termination = "stalled"
            break
        x = x_next
        k += 1

    if records and records[-1].k == k:
        records[-1] = _record(k, eta, last_residual, x, reference, True)
    else:
        records.append(_record(k, eta, last_residual, x, reference, True))
    return RunLog(records=tuple(records), rhs=rhs, disc=disc, termination=termination)
