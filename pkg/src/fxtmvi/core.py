"""Problem and parameter data model shared by every other module.

States are plain 1-D ``float64`` numpy arrays.  All container types are
frozen dataclasses; stored arrays are made read-only so values can be
shared across threads without synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "DiscretizationParams",
    "FlowParams",
    "InconsistentExponentsError",
    "IterateRecord",
    "LambdaOutOfWindowError",
    "MissingCertificatesError",
    "MviProblem",
    "NoConvergenceError",
    "NonFiniteError",
    "RunLog",
    "UncertifiedAlpha1Error",
    "ValidationReport",
    "as_vector",
    "euclidean_norm",
    "validate_problem",
    "TERMINATION_REASONS",
]


class DimensionMismatchError(ValueError):
    """Two vectors that must share a dimension do not."""


class NonFiniteError(ArithmeticError):
    """A NaN or infinity appeared where only finite values are allowed."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class MissingCertificatesError(ValueError):
    """A monotonicity modulus or Lipschitz constant is required but absent."""


class LambdaOutOfWindowError(ValueError):
    """The prox step lies outside the open interval that certifies contraction."""


class UncertifiedAlpha1Error(ValueError):
    """The sub-unity exponent falls outside its certified window."""


class InconsistentExponentsError(ValueError):
    """The exponent pair is not symmetric about 1, so no single scale fits."""


class NoConvergenceError(RuntimeError):
    """An iteration hit its cap before meeting its tolerance."""


def as_vector(x: Any, dim: int | None = None) -> np.ndarray:
    """Validate and copy ``x`` into a read-only 1-D float64 array.

    Rejects NaN/Inf entries and, when ``dim`` is given, any dimension
    mismatch.
    """
    v = np.array(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.isfinite(v).all():
        raise NonFiniteError("vector contains NaN or Inf entries")
    v.flags.writeable = False
    return v


def euclidean_norm(v: np.ndarray) -> float:
    """Return sqrt(<v, v>) after checking the entries are finite."""
    v = np.asarray(v, dtype=float)
    if not np.isfinite(v).all():
        raise NonFiniteError("vector contains NaN or Inf entries")
    return math.sqrt(float(v @ v))


@dataclass(frozen=True)
class MviProblem:
    """An operator together with the prox of its non-smooth term.

    Parameters
    ----------
    operator : callable
        Maps a state vector to a vector of the same dimension.
    prox : callable
        ``prox(tau, x)`` evaluates the proximal map of the non-smooth term
        scaled by ``tau``; must be defined for every ``tau > 0``.
    mu : float, optional
        Monotonicity modulus of ``operator`` (see ``monotonicity``).
    lip : float, optional
        Lipschitz constant of ``operator``.
    reference_solution : array, optional
        Known solution used to fill error columns in run logs.
    monotonicity : {"strong", "strong_pseudo"}
        Which modulus ``mu`` certifies.  ``mu <= lip`` is enforced only for
        the strongly monotone case; for a pseudomonotonicity modulus the
        Cauchy-Schwarz argument behind that bound does not apply.
    """

    operator: Callable[[np.ndarray], np.ndarray]
    prox: Callable[[float, np.ndarray], np.ndarray]
    mu: float | None = None
    lip: float | None = None
    reference_solution: np.ndarray | None = None
    monotonicity: str = "strong"

    def __post_init__(self):
        if self.monotonicity not in ("strong", "strong_pseudo"):
            raise ValueError(f"unknown monotonicity kind {self.monotonicity!r}")
        if self.mu is not None and not self.mu > 0:
            raise ValueError("mu must be positive when given")
        if self.lip is not None and not self.lip > 0:
            raise ValueError("lip must be positive when given")
        if (
            self.monotonicity == "strong"
            and self.mu is not None
            and self.lip is not None
            and self.mu > self.lip
        ):
            raise ValueError(
                f"mu={self.mu} exceeds lip={self.lip}; impossible for a "
                "strongly monotone Lipschitz operator"
            )
        if self.reference_solution is not None:
            object.__setattr__(
                self, "reference_solution", as_vector(self.reference_solution)
            )


@dataclass(frozen=True)
class FlowParams:
    """Tunables of the modified flow: prox step, gains, exponent pair."""

    lam: float
    kappa1: float
    kappa2: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.kappa1 > 0:
            raise ValueError("kappa1 must be positive")
        if not self.kappa2 > 0:
            raise ValueError("kappa2 must be positive")
        if not 0 < self.alpha1 < 1:
            raise ValueError("alpha1 must lie in (0, 1)")
        if not self.alpha2 > 1:
            raise ValueError("alpha2 must exceed 1")

    @classmethod
    def _unchecked(cls, lam, kappa1, kappa2, alpha1, alpha2) -> "FlowParams":
        # Test-only escape hatch: bypasses range validation so degenerate
        # parameter sets (alpha1 = 1, kappa2 = 0) can be constructed.
        self = object.__new__(cls)
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "kappa1", float(kappa1))
        object.__setattr__(self, "kappa2", float(kappa2))
        object.__setattr__(self, "alpha1", float(alpha1))
        object.__setattr__(self, "alpha2", float(alpha2))
        return self


@dataclass(frozen=True)
class DiscretizationParams:
    """Forward-Euler stepping controls.

    ``fix_threshold`` is the residual below which a state is declared a
    fixed point of the prox-gradient map; the flow's gain is exactly zero
    there in exact arithmetic but floating point never reaches it.
    """

    eta: float
    max_steps: int
    stop_residual: float = 0.0
    fix_threshold: float = 1e-13

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not (isinstance(self.max_steps, int) and self.max_steps >= 1):
            raise ValueError("max_steps must be a positive integer")
        if self.stop_residual < 0:
            raise ValueError("stop_residual must be nonnegative")
        if not self.fix_threshold > 0:
            raise ValueError("fix_threshold must be positive")


@dataclass(frozen=True)
class IterateRecord:
    """One logged iterate: step index, model time, residual, optional error."""

    k: int
    t: float
    residual: float
    error: float | None = None
    lyapunov: float | None = None
    state: np.ndarray | None = None

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")
        if (self.error is None) != (self.lyapunov is None):
            raise ValueError("error and lyapunov must be populated together")
        if self.error is not None and not math.isclose(
            self.lyapunov, 0.5 * self.error**2, rel_tol=1e-12, abs_tol=1e-300
        ):
            raise ValueError("lyapunov must equal error**2 / 2")
        if self.state is not None:
            object.__setattr__(self, "state", as_vector(self.state))


TERMINATION_REASONS = ("residual_met", "step_cap", "fixed_point", "stalled")


@dataclass(frozen=True)
class RunLog:
    """Recorded trajectory of one solve call.

    ``rhs`` holds the right-hand-side description the run used (nominal or
    modified), ``disc`` the stepping controls.  ``termination`` is one of
    ``TERMINATION_REASONS``; ``stalled`` marks an iterate frozen bitwise by
    floating-point underflow of the update, after which every later iterate
    would be identical.
    """

    records: tuple[IterateRecord, ...]
    rhs: Any
    disc: DiscretizationParams
    termination: str

    def __post_init__(self):
        if self.termination not in TERMINATION_REASONS:
            raise ValueError(f"unknown termination reason {self.termination!r}")
        object.__setattr__(self, "records", tuple(self.records))
        ks = [r.k for r in self.records]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("record step indices must be strictly increasing")

    @property
    def final(self) -> IterateRecord:
        return self.records[-1]

    @property
    def steps(self) -> int:
        return self.records[-1].k

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])

    def errors(self) -> np.ndarray | None:
        if self.records and self.records[0].error is None:
            return None
        return np.array([r.error for r in self.records])

    def lyapunovs(self) -> np.ndarray | None:
        if self.records and self.records[0].lyapunov is None:
            return None
        return np.array([r.lyapunov for r in self.records])


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a problem/parameter pairing against the theory."""

    checkable: bool
    lambda_window: tuple[float, float] | None = None
    lambda_ok: bool | None = None
    alpha1_window: tuple[float, float] | None = None
    alpha1_ok: bool | None = None
    reasons: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return bool(self.checkable and self.lambda_ok and self.alpha1_ok)


def validate_problem(problem: MviProblem, flow: FlowParams) -> ValidationReport:
    """Check whether the prox step and exponents are inside certified ranges.

    Returns a report rather than raising: with ``mu``/``lip`` missing the
    result degrades to "uncheckable".
    """
    from . import analysis

    if problem.mu is None or problem.lip is None:
        return ValidationReport(
            checkable=False,
            reasons=("missing_certificates: mu and lip are required to "
                     "validate the prox step",),
        )
    window = analysis.lambda_window(problem.mu, problem.lip)
    lambda_ok = window[0] < flow.lam < window[1]
    reasons = [
        f"lam={flow.lam:g} is {'inside' if lambda_ok else 'outside'} the open "
        f"window ({window[0]:g}, {window[1]:g})"
    ]
    alpha1_window = None
    alpha1_ok = None
    if lambda_ok:
        c = analysis.contraction_factor(problem.mu, problem.lip, flow.lam)
        alpha1_window = analysis.alpha1_window(c)
        alpha1_ok = alpha1_window[0] < flow.alpha1 < alpha1_window[1]
        reasons.append(
            f"alpha1={flow.alpha1:g} is {'inside' if alpha1_ok else 'outside'} "
            f"the certified window ({alpha1_window[0]:.6g}, 1)"
        )
    else:
        reasons.append("alpha1 window not computed: no contraction factor "
                       "outside the lam window")
    return ValidationReport(
        checkable=True,
        lambda_window=window,
        lambda_ok=lambda_ok,
        alpha1_window=alpha1_window,
        alpha1_ok=alpha1_ok,
        reasons=tuple(reasons),
    )
