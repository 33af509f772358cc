"""Closed-form convergence certificates for the modified dynamics.

Everything here is derived from two supplied constants: a strong
monotonicity (or pseudomonotonicity) modulus ``mu`` and a Lipschitz
constant ``lip``.  The chain is:

1. For a prox step ``lam`` in ``(0, 2 mu / lip**2)`` the prox-gradient map
   shrinks distances to the solution by ``contraction_factor(mu, lip, lam)``
   in ``(0, 1)``.
2. Given that contraction ``c``, the sub-unity exponent ``alpha1`` of the
   modified dynamics is certified on the open window
   ``(max(0, 1 - alpha1_margin(c)), 1)``; any ``alpha2 > 1`` is admissible.
3. Inside the window the squared-distance value function ``V`` obeys
   ``dV/dt <= -(c1 V^e1 + c2 V^e2)`` with ``e1 < 1 < e2``, which yields a
   settling-time bound independent of the initial condition, and a fixed
   iteration budget plus an error envelope for the forward-Euler scheme.

``state_decay_coef`` may legitimately return a nonpositive number: that is
exactly the signal that the requested ``alpha1`` is outside its certified
window, and every bound that needs it reports ``uncertified`` instead of a
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    DiscretizationParams,
    FlowParams,
    InconsistentExponentsError,
    LambdaOutOfWindowError,
    MissingCertificatesError,
    MviProblem,
    UncertifiedAlpha1Error,
)

__all__ = [
    "ConvergenceCertificate",
    "alpha1_margin",
    "alpha1_window",
    "certificate",
    "certificate_from_constants",
    "continuous_envelope",
    "contraction_factor",
    "discrete_envelope",
    "exponents_from_xi",
    "lambda_window",
    "lyap_decay_coef",
    "lyap_exponent",
    "settle_time_bound",
    "settle_time_bound_xi",
    "state_decay_coef",
    "step_budget",
    "xi_from_exponents",
]


def lambda_window(mu: float, lip: float) -> tuple[float, float]:
    """Open interval of prox steps for which the prox-gradient map contracts."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    if not lip > 0:
        raise ValueError("lip must be positive")
    return (0.0, 2.0 * mu / lip**2)


def contraction_factor(mu: float, lip: float, lam: float) -> float:
    """Distance shrink factor of one prox-gradient application.

    Returns ``1 / sqrt(1 + 2 lam mu - lam**2 lip**2)``, which lies in (0, 1)
    exactly when ``lam`` is inside the open window ``(0, 2 mu / lip**2)``;
    outside (boundary included) raises ``LambdaOutOfWindowError``.
    """
    lo, hi = lambda_window(mu, lip)
    if not lo < lam < hi:
        raise LambdaOutOfWindowError(f"lambda outside ({lo:g}, {hi:g}): {lam:g}")
    return 1.0 / math.sqrt(1.0 + 2.0 * lam * mu - lam**2 * lip**2)


def alpha1_margin(c: float) -> float:
    """Admissible width below 1 for the sub-unity exponent, given contraction ``c``.

    Equals ``log(c) / log((1-c)/(1+c))``; both logarithms are negative, so
    the margin is positive for every ``c`` in (0, 1).  For any ``alpha`` in
    ``(1 - margin, 1)`` the key inequality ``((1-c)/(1+c))**(1-alpha) > c``
    holds, and it fails for every ``alpha`` below ``1 - margin``.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"contraction must lie in (0, 1), got {c:g}")
    return math.log(c) / math.log((1.0 - c) / (1.0 + c))


def alpha1_window(c: float) -> tuple[float, float]:
    """Certified open window for the sub-unity exponent, clamped into (0, 1)."""
    return (max(0.0, 1.0 - alpha1_margin(c)), 1.0)


def state_decay_coef(kappa: float, alpha: float, c: float) -> float:
    """Coefficient of ``||x - x*||**(1+alpha)`` in the descent bound.

    ``kappa / (1-c)**(1-alpha) * (((1-c)/(1+c))**(1-alpha) - c)``, returned
    as-is: it is positive exactly when ``alpha`` is certified (always, for
    ``alpha > 1``), and callers check the sign.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"contraction must lie in (0, 1), got {c:g}")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    ratio = (1.0 - c) / (1.0 + c)
    return kappa / (1.0 - c) ** (1.0 - alpha) * (ratio ** (1.0 - alpha) - c)


def lyap_exponent(alpha: float) -> float:
    """Exponent on the value function paired with gain exponent ``alpha``."""
    return (1.0 + alpha) / 2.0


def lyap_decay_coef(kappa: float, alpha: float, c: float) -> float:
    """Coefficient on ``V**lyap_exponent(alpha)`` in the value-decay bound.

    ``2**((1+alpha)/2)`` times ``state_decay_coef``; shares its sign.
    """
    return 2.0 ** lyap_exponent(alpha) * state_decay_coef(kappa, alpha, c)


def settle_time_bound(flow: FlowParams, c: float) -> float:
    """Initial-condition-independent bound on the time to reach the solution.

    ``1/(c1 (1 - e1)) + 1/(c2 (e2 - 1))`` with the two value-decay
    coefficients and exponents of ``flow``.  Raises
    ``UncertifiedAlpha1Error`` when ``flow.alpha1`` sits outside its
    certified window (the formula is meaningless there).
    """
    q1 = state_decay_coef(flow.kappa1, flow.alpha1, c)
    if q1 <= 0:
        lo, _ = alpha1_window(c)
        raise UncertifiedAlpha1Error(
            f"alpha1={flow.alpha1:g} outside certified window ({lo:.6g}, 1)"
        )
    q2 = state_decay_coef(flow.kappa2, flow.alpha2, c)
    if q2 <= 0:
        raise ValueError("alpha2 must exceed 1 for a finite bound")
    c1 = lyap_decay_coef(flow.kappa1, flow.alpha1, c)
    c2 = lyap_decay_coef(flow.kappa2, flow.alpha2, c)
    e1 = lyap_exponent(flow.alpha1)
    e2 = lyap_exponent(flow.alpha2)
    return 1.0 / (c1 * (1.0 - e1)) + 1.0 / (c2 * (e2 - 1.0))


def exponents_from_xi(xi: float) -> tuple[float, float]:
    """Symmetric exponent pair ``(1 - 2/xi, 1 + 2/xi)`` for a scale ``xi > 2``."""
    if not xi > 2:
        raise ValueError(f"xi must exceed 2, got {xi:g}")
    return 1.0 - 2.0 / xi, 1.0 + 2.0 / xi


def xi_from_exponents(alpha1: float, alpha2: float) -> float:
    """Invert ``exponents_from_xi``; the two exponents must agree on one scale.

    Raises ``InconsistentExponentsError`` when ``2/(1-alpha1)`` differs from
    ``2/(alpha2-1)`` by more than 1e-9 relative.
    """
    if not 0.0 < alpha1 < 1.0:
        raise ValueError("alpha1 must lie in (0, 1)")
    if not alpha2 > 1.0:
        raise ValueError("alpha2 must exceed 1")
    xi1 = 2.0 / (1.0 - alpha1)
    xi2 = 2.0 / (alpha2 - 1.0)
    if not math.isclose(xi1, xi2, rel_tol=1e-9):
        raise InconsistentExponentsError(
            f"exponents are not symmetric about 1: scales {xi1:g} vs {xi2:g}"
        )
    return 0.5 * (xi1 + xi2)


def settle_time_bound_xi(c1: float, c2: float, xi: float) -> float:
    """Settling bound ``xi pi / (2 sqrt(c1 c2))`` in the symmetric-exponent form."""
    if not (c1 > 0 and c2 > 0):
        raise ValueError("decay coefficients must be positive")
    if not xi > 0:
        raise ValueError("xi must be positive")
    return xi * math.pi / (2.0 * math.sqrt(c1 * c2))


def step_budget(xi: float, eta: float, c1: float, c2: float) -> int:
    """Fixed forward-Euler iteration budget ``ceil(settle bound / eta)``.

    Independent of the initial condition; after this many steps of size
    ``eta`` the iterate is inside the scheme's error floor.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    return math.ceil(settle_time_bound_xi(c1, c2, xi) / eta)


def continuous_envelope(
    t: float, c1: float, c2: float, xi: float, growth: float
) -> float:
    """Worst-case distance to the solution at time ``t`` along the flow.

    ``(1/sqrt(growth)) (sqrt(c1/c2) tan(pi/2 - sqrt(c1 c2) t / xi))**(xi/2)``
    for ``t`` below the settling bound, and exactly 0 afterwards.  ``growth``
    is the quadratic-growth coefficient of the value function (1/2 for half
    squared distance).  At ``t = 0`` the envelope is unbounded and the
    distinguished value ``math.inf`` is returned; callers must branch on it
    rather than feed it into arithmetic.
    """
    if not growth > 0:
        raise ValueError("growth must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    bound = settle_time_bound_xi(c1, c2, xi)
    if t >= bound:
        return 0.0
    if t == 0.0:
        return math.inf
    angle = math.pi / 2.0 - math.sqrt(c1 * c2) / xi * t
    return (math.sqrt(c1 / c2) * math.tan(angle)) ** (xi / 2.0) / math.sqrt(growth)


def discrete_envelope(
    k: int, eta: float, c1: float, c2: float, xi: float, floor: float
) -> float:
    """Worst-case distance at step ``k`` of the forward-Euler scheme.

    Equals ``continuous_envelope(eta k, ...)`` with growth 1/2 (so a sqrt(2)
    prefactor) plus ``floor`` up to the step budget, and ``floor`` alone
    afterwards: past the budget the iterate stays inside the
    ``floor``-neighborhood of the solution.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not floor > 0:
        raise ValueError("floor must be positive")
    if k > step_budget(xi, eta, c1, c2):
        return floor
    return continuous_envelope(eta * k, c1, c2, xi, 0.5) + floor


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Every closed-form guarantee derivable for one problem/parameter pairing.

    ``alpha1_certified`` is the sign of ``state_coef1``: when false, the
    settle bound and step budget do not exist for these parameters and are
    ``None`` while the remaining fields are still reported.  ``xi`` is
    ``None`` when the exponents are not symmetric about 1.
    ``estimated_constants`` marks certificates computed from sampled
    ``mu``/``lip`` values, which are diagnostics rather than guarantees.
    """

    contraction: float
    alpha1_margin: float
    alpha1_window: tuple[float, float]
    state_coef1: float
    state_coef2: float
    lyap_coef1: float
    lyap_coef2: float
    lyap_exp1: float
    lyap_exp2: float
    alpha1_certified: bool
    settle_bound: float | None
    xi: float | None
    step_budget: int | None
    eta: float
    estimated_constants: bool = False

    def discrete_envelope(self, k: int, floor: float) -> float:
        """Error envelope at step ``k``; requires a certified parameter set."""
        if not self.alpha1_certified or self.xi is None:
            raise UncertifiedAlpha1Error(
                "no envelope: parameters are not certified or not xi-symmetric"
            )
        return discrete_envelope(
            k, self.eta, self.lyap_coef1, self.lyap_coef2, self.xi, floor
        )


def certificate_from_constants(
    mu: float,
    lip: float,
    flow: FlowParams,
    eta: float,
    estimated: bool = False,
) -> ConvergenceCertificate:
    """Assemble the full certificate from explicit constants.

    Never raises for an uncertified ``alpha1``; the certificate is emitted
    with the flag cleared and the dependent bounds absent.  A prox step
    outside its window still raises ``LambdaOutOfWindowError``, since
    nothing downstream is defined there.
    """
    c = contraction_factor(mu, lip, flow.lam)
    margin = alpha1_margin(c)
    window = alpha1_window(c)
    q1 = state_decay_coef(flow.kappa1, flow.alpha1, c)
    q2 = state_decay_coef(flow.kappa2, flow.alpha2, c)
    c1 = lyap_decay_coef(flow.kappa1, flow.alpha1, c)
    c2 = lyap_decay_coef(flow.kappa2, flow.alpha2, c)
    certified = q1 > 0
    settle = settle_time_bound(flow, c) if certified else None
    try:
        xi = xi_from_exponents(flow.alpha1, flow.alpha2)
    except InconsistentExponentsError:
        xi = None
    budget = (
        step_budget(xi, eta, c1, c2) if (xi is not None and certified) else None
    )
    return ConvergenceCertificate(
        contraction=c,
        alpha1_margin=margin,
        alpha1_window=window,
        state_coef1=q1,
        state_coef2=q2,
        lyap_coef1=c1,
        lyap_coef2=c2,
        lyap_exp1=lyap_exponent(flow.alpha1),
        lyap_exp2=lyap_exponent(flow.alpha2),
        alpha1_certified=certified,
        settle_bound=settle,
        xi=xi,
        step_budget=budget,
        eta=eta,
        estimated_constants=estimated,
    )


def certificate(
    problem: MviProblem,
    flow: FlowParams,
    disc: DiscretizationParams,
    estimated: bool = False,
) -> ConvergenceCertificate:
    """Certificate for a problem carrying its own ``mu`` and ``lip``."""
    if problem.mu is None or problem.lip is None:
        raise MissingCertificatesError(
            "problem must carry mu and lip to compute a certificate"
        )
    return certificate_from_constants(
        problem.mu, problem.lip, flow, disc.eta, estimated=estimated
    )
