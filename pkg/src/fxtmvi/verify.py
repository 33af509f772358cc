"""Self-contained property suite behind the ``verify`` CLI verb.

Each check exercises one contract of the library against an independent
reference (brute-force minimizer, finite differences, random sampling) and
reports pass/fail with a short diagnostic.  Seeds are fixed so the suite is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis, bench, flow, operators, prox
from .operators import sample_rng

__all__ = ["CheckResult", "all_checks", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _norm_axioms() -> CheckResult:
    rng = sample_rng(101)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 30))
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        s = float(rng.normal())
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        tri = np.linalg.norm(u + v) - (nu + nv)
        hom = abs(np.linalg.norm(s * u) - abs(s) * nu)
        scale = max(1.0, nu + nv)
        worst = max(worst, tri / scale, hom / scale)
        if nu == 0.0 and np.any(u != 0):
            return CheckResult("norm_axioms", False, "positivity violated")
    ok = worst <= 1e-12
    return CheckResult("norm_axioms", ok, f"worst relative defect {worst:.2e}")


def _prox_l1_oracle() -> CheckResult:
    rng = sample_rng(202)
    xs = rng.uniform(-5, 5, size=3000)
    taus = 10.0 ** rng.uniform(-2, 0.5, size=3000)
    got = np.array([prox.prox_l1(np.array([x]), t)[0] for x, t in zip(xs, taus)])
    want = prox.prox_oracle_separable(np.abs, xs, taus)
    worst = float(np.max(np.abs(got - want)))
    return CheckResult("prox_l1_oracle", worst <= 1e-8, f"max deviation {worst:.2e}")


def _projection_properties() -> CheckResult:
    rng = sample_rng(303)
    center = np.array([2.0, 2.0])
    lo = np.array([-1.0, 0.0, 0.5])
    hi = np.array([1.0, 2.0, 0.5])
    for _ in range(500):
        x = rng.uniform(-20, 20, 2)
        p = prox.project_ball(x, center, 1.0)
        if np.linalg.norm(p - center) > 1.0 + 1e-12:
            return CheckResult(
                "projection_properties", False, f"infeasible ball output at {x}"
            )
        if not np.array_equal(prox.project_ball(p, center, 1.0), p):
            return CheckResult(
                "projection_properties", False, f"ball projection not idempotent at {x}"
            )
        z = rng.uniform(-3, 3, 3)
        q = prox.project_box(z, lo, hi)
        if not np.array_equal(prox.project_box(q, lo, hi), q):
            return CheckResult(
                "projection_properties", False, f"box projection not idempotent at {z}"
            )
    return CheckResult("projection_properties", True, "feasible and idempotent")


def _prox_nonexpansive() -> CheckResult:
    rng = sample_rng(404)
    center = np.array([2.0, 2.0])
    handles = [
        ("l1", prox.l1_penalty(2.5), 3),
        ("ball", prox.ball_indicator(center, 1.0), 2),
        ("box", prox.box_indicator([-1.0, -1.0], [1.0, 1.0]), 2),
        ("zero", prox.zero_function(), 2),
    ]
    for name, handle, dim in handles:
        for _ in range(300):
            x = rng.uniform(-10, 10, dim)
            z = rng.uniform(-10, 10, dim)
            tau = float(10.0 ** rng.uniform(-2, 0))
            lhs = np.linalg.norm(handle(tau, x) - handle(tau, z))
            rhs = np.linalg.norm(x - z)
            if lhs > rhs + 1e-12:
                return CheckResult(
                    "prox_nonexpansive", False, f"{name} expanded a pair by {lhs - rhs:.2e}"
                )
    return CheckResult("prox_nonexpansive", True, "all kinds nonexpansive")


def _gradient_consistency() -> CheckResult:
    dataset = operators.generate_dataset(0)
    op = operators.elasticnet_logistic_operator(dataset, beta2=0.25)
    obj = operators.elasticnet_smooth_objective(dataset, beta2=0.25)
    rng = sample_rng(505)
    step = 1e-6
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-2, 2, 3)
        g = op(x)
        fd = np.empty(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = step
            fd[j] = (obj(x + e) - obj(x - e)) / (2 * step)
        worst = max(worst, float(np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g)))))
    return CheckResult(
        "gradient_consistency", worst <= 1e-5, f"worst relative deviation {worst:.2e}"
    )


def _dataset_determinism() -> CheckResult:
    a = operators.generate_dataset(7)
    b = operators.generate_dataset(7)
    same = np.array_equal(a.labels, b.labels) and np.array_equal(
        a.features, b.features
    )
    return CheckResult(
        "dataset_determinism", same, "same seed reproduces bit-identical data"
    )


def _exponent_inequality() -> CheckResult:
    rng = sample_rng(606)
    ratio_test: Callable[[float, float], bool] = (
        lambda c, a: ((1.0 - c) / (1.0 + c)) ** (1.0 - a) > c
    )
    for _ in range(10_000):
        c = float(rng.uniform(0.01, 0.99))
        lo, hi = analysis.alpha1_window(c)
        a = lo + (hi - lo) * float(rng.uniform(1e-3, 1 - 1e-3))
        if not ratio_test(c, a):
            return CheckResult(
                "exponent_inequality", False, f"window violation at c={c}, alpha={a}"
            )
        a_super = 1.0 + float(10.0 ** rng.uniform(-3, 1))
        if not ratio_test(c, a_super):
            return CheckResult(
                "exponent_inequality", False, f"super-unity violation at c={c}"
            )
    for c in (0.5, 0.9, 0.99751):
        margin = analysis.alpha1_margin(c)
        if not ratio_test(c, 1.0 - margin + 1e-9):
            return CheckResult(
                "exponent_inequality", False, f"bracket inside failed at c={c}"
            )
        if ratio_test(c, 1.0 - margin - 1e-3):
            return CheckResult(
                "exponent_inequality", False, f"bracket outside held at c={c}"
            )
    return CheckResult("exponent_inequality", True, "holds on 10^4 pairs and brackets")


def _contraction_empirical() -> CheckResult:
    preset = bench.build_example1()
    ref = bench.reference_solution(preset.problem, preset.flow.lam, x0=np.zeros(2))
    c = analysis.contraction_factor(
        preset.problem.mu, preset.problem.lip, preset.flow.lam
    )
    rng = sample_rng(707)
    worst = 0.0
    for _ in range(1000):
        x = rng.uniform(-10, 10, 2)
        y = flow.prox_grad_map(preset.problem, preset.flow.lam, x)
        worst = max(
            worst, float(np.linalg.norm(y - ref) / np.linalg.norm(x - ref))
        )
    return CheckResult(
        "contraction_empirical",
        worst <= c + 1e-10,
        f"max shrink ratio {worst:.2e} vs factor {c:.5f}",
    )


def _budget_identity() -> CheckResult:
    rng = sample_rng(808)
    for _ in range(500):
        c1 = float(10.0 ** rng.uniform(-2, 2))
        c2 = float(10.0 ** rng.uniform(-2, 2))
        xi = float(rng.uniform(2.01, 200.0))
        eta = float(10.0 ** rng.uniform(-6, -2))
        lhs = analysis.step_budget(xi, eta, c1, c2)
        rhs = math.ceil(analysis.settle_time_bound_xi(c1, c2, xi) / eta)
        if lhs != rhs:
            return CheckResult(
                "budget_identity", False, f"mismatch {lhs} vs {rhs} at xi={xi}"
            )
    return CheckResult("budget_identity", True, "budget equals ceil(bound/eta)")


def _envelope_consistency() -> CheckResult:
    c1, c2, xi, eta, floor = 17.0, 30.0, 10.0, 1e-4, 1e-9
    bound = analysis.settle_time_bound_xi(c1, c2, xi)
    budget = analysis.step_budget(xi, eta, c1, c2)
    for t in (bound, bound * 1.0000001, bound * 10):
        if analysis.continuous_envelope(t, c1, c2, xi, 0.5) != 0.0:
            return CheckResult(
                "envelope_consistency", False, f"nonzero past the bound at t={t}"
            )
    for k in (1, 7, budget // 2, budget, budget + 1, budget * 2):
        disc_val = analysis.discrete_envelope(k, eta, c1, c2, xi, floor)
        cont_val = (
            analysis.continuous_envelope(eta * k, c1, c2, xi, 0.5) + floor
            if k <= budget
            else floor
        )
        if disc_val != cont_val:
            return CheckResult(
                "envelope_consistency", False, f"discrete/continuous mismatch at k={k}"
            )
    return CheckResult("envelope_consistency", True, "branches and prefactors agree")


def _lyapunov_descent() -> CheckResult:
    for name, preset in (("example1", bench.build_example1()),
                         ("example2", bench.build_example2(0))):
        ref = bench.reference_solution(
            preset.problem,
            preset.flow.lam,
            x0=np.zeros(2 if name == "example1" else 3),
        )
        problem = bench.with_reference(preset.problem, ref)
        x0 = np.full(ref.shape[0], 4.0)
        log = flow.solve(
            problem, flow.ModifiedRhs(preset.flow), preset.disc, x0, record_every=50
        )
        values = log.lyapunovs()
        if np.any(np.diff(values) > 1e-12):
            return CheckResult(
                "lyapunov_descent", False, f"increase along {name} run"
            )
    return CheckResult("lyapunov_descent", True, "nonincreasing on both examples")


def _fixed_point_solves_problem() -> CheckResult:
    preset = bench.build_example2(0)
    ref = bench.reference_solution(preset.problem, preset.flow.lam, x0=np.zeros(3))
    weight = 2.5

    def g(v: np.ndarray) -> float:
        return weight * float(np.abs(v).sum())

    fbar = preset.problem.operator(ref)
    rng = sample_rng(909)
    worst = np.inf
    for _ in range(100):
        z = ref + rng.uniform(-0.5, 0.5, 3)
        gap = float(fbar @ (z - ref)) + g(z) - g(ref)
        worst = min(worst, gap)
    return CheckResult(
        "fixed_point_solves_problem",
        worst >= -1e-6,
        f"smallest inequality slack {worst:.2e}",
    )


def all_checks() -> list[Callable[[], CheckResult]]:
    return [
        _norm_axioms,
        _prox_l1_oracle,
        _projection_properties,
        _prox_nonexpansive,
        _gradient_consistency,
        _dataset_determinism,
        _exponent_inequality,
        _contraction_empirical,
        _budget_identity,
        _envelope_consistency,
        _lyapunov_descent,
        _fixed_point_solves_problem,
    ]


def run_checks() -> list[CheckResult]:
    """Run every property check; never raises, failures are results."""
    results = []
    for check in all_checks():
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failure, not an abort
            results.append(
                CheckResult(check.__name__.lstrip("_"), False, f"crashed: {exc!r}")
            )
    return results
