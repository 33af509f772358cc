import math

import numpy as np
import pytest

from fxtmvi.analysis import (
    alpha1_margin,
    alpha1_window,
    certificate,
    certificate_from_constants,
    continuous_envelope,
    contraction_factor,
    discrete_envelope,
    exponents_from_xi,
    lambda_window,
    lyap_decay_coef,
    lyap_exponent,
    settle_time_bound,
    settle_time_bound_xi,
    state_decay_coef,
    step_budget,
    xi_from_exponents,
)
from fxtmvi.core import (
    DiscretizationParams,
    FlowParams,
    InconsistentExponentsError,
    LambdaOutOfWindowError,
    MissingCertificatesError,
    MviProblem,
    UncertifiedAlpha1Error,
)
from fxtmvi.prox import zero_function

C_EX1 = 1.0 / math.sqrt(5.84)
C_EX2 = 1.0 / math.sqrt(1.0 + 2 * 0.005 * 0.5 - 0.005**2 * 0.25)


def test_contraction_factor_values():
    assert contraction_factor(11.0, 5.0, 0.44) == pytest.approx(C_EX1, rel=1e-15)
    assert contraction_factor(11.0, 5.0, 0.44) == pytest.approx(0.41380, abs=5e-6)
    assert contraction_factor(0.5, 0.5, 0.005) == pytest.approx(0.997512, abs=5e-7)
    assert lambda_window(11.0, 5.0) == pytest.approx((0.0, 0.88))


@pytest.mark.parametrize("lam", [0.0, -0.1, 2.0, 2.5])
def test_contraction_factor_rejects_window_boundary(lam):
    # window for mu = lip = 1 is the open interval (0, 2)
    with pytest.raises(LambdaOutOfWindowError):
        contraction_factor(1.0, 1.0, lam)


def test_alpha1_margin_values():
    assert alpha1_margin(0.5) == pytest.approx(math.log(2) / math.log(3), rel=1e-14)
    # wide-contraction case: margin above 1, so the window clamps at 0
    assert alpha1_margin(C_EX1) == pytest.approx(1.00225, abs=1e-5)
    assert alpha1_window(C_EX1) == (0.0, 1.0)
    assert alpha1_margin(C_EX2) == pytest.approx(3.7239e-4, rel=1e-4)
    with pytest.raises(ValueError):
        alpha1_margin(1.0)
    with pytest.raises(ValueError):
        alpha1_margin(0.0)


@pytest.mark.parametrize("c", [0.5, 0.9, C_EX2])
def test_alpha1_margin_brackets_the_inequality(c):
    margin = alpha1_margin(c)
    ratio = (1.0 - c) / (1.0 + c)
    assert ratio ** (1.0 - (1.0 - margin + 1e-9)) > c
    assert not ratio ** (1.0 - (1.0 - margin - 1e-3)) > c


def test_state_decay_coef_values():
    # alpha = 1 collapses both powers
    assert state_decay_coef(7.0, 1.0, 0.3) == pytest.approx(7.0 * 0.7, rel=1e-14)
    # independent log-domain evaluation of the full expression
    c = C_EX1
    ratio_pow = math.exp(0.2 * math.log((1.0 - c) / (1.0 + c)))
    base_pow = math.exp(0.2 * math.log(1.0 - c))
    want = 20.0 * (ratio_pow - c) / base_pow
    assert state_decay_coef(20.0, 0.8, c) == pytest.approx(want, rel=1e-13)
    assert want == pytest.approx(9.45, abs=5e-3)


def test_state_decay_coef_positive_above_one():
    rng = np.random.Generator(np.random.Philox(key=51))
    for _ in range(1000):
        c = float(rng.uniform(0.01, 0.99))
        alpha = 1.0 + float(10.0 ** rng.uniform(-3, 1))
        assert state_decay_coef(1.0, alpha, c) > 0.0


def test_lyap_exponent_and_coef():
    assert lyap_exponent(1.0) == 1.0
    assert lyap_exponent(0.8) == pytest.approx(0.9)
    assert lyap_exponent(1.2) == pytest.approx(1.1)
    c = C_EX1
    assert lyap_decay_coef(20.0, 0.8, c) == pytest.approx(
        2.0**0.9 * state_decay_coef(20.0, 0.8, c), rel=1e-14
    )


def test_settle_time_bound_toy_value():
    # gains chosen so both value-decay coefficients equal 10 exactly:
    # then the bound is 1/(10*0.1) + 1/(10*0.1) = 2
    c = 0.5
    kappa1 = 10.0 / (2.0**0.9 * state_decay_coef(1.0, 0.8, c))
    kappa2 = 10.0 / (2.0**1.1 * state_decay_coef(1.0, 1.2, c))
    flow = FlowParams(lam=1.0, kappa1=kappa1, kappa2=kappa2, alpha1=0.8, alpha2=1.2)
    assert settle_time_bound(flow, c) == pytest.approx(2.0, rel=1e-12)


def test_settle_time_bound_pipeline_consistency():
    flow = FlowParams(lam=0.44, kappa1=20.0, kappa2=20.0, alpha1=0.8, alpha2=1.2)
    got = settle_time_bound(flow, C_EX1)
    c1 = lyap_decay_coef(20.0, 0.8, C_EX1)
    c2 = lyap_decay_coef(20.0, 1.2, C_EX1)
    want = 1.0 / (c1 * (1.0 - 0.9)) + 1.0 / (c2 * (1.1 - 1.0))
    assert got == pytest.approx(want, rel=1e-13)
    assert 0.0 < got < math.inf


def test_settle_time_bound_rejects_uncertified_alpha1():
    flow = FlowParams(lam=0.005, kappa1=20.0, kappa2=200.0, alpha1=0.97, alpha2=1.03)
    with pytest.raises(UncertifiedAlpha1Error):
        settle_time_bound(flow, C_EX2)


def test_exponent_scale_round_trip():
    assert exponents_from_xi(10.0) == pytest.approx((0.8, 1.2), rel=1e-15)
    a1, a2 = exponents_from_xi(1e9)
    assert abs(a1 - 1.0) < 1e-8 and abs(a2 - 1.0) < 1e-8
    assert xi_from_exponents(0.97, 1.03) == pytest.approx(200.0 / 3.0, rel=1e-12)
    with pytest.raises(InconsistentExponentsError):
        xi_from_exponents(0.8, 1.3)
    with pytest.raises(ValueError):
        exponents_from_xi(2.0)


def test_settle_time_bound_xi_value():
    # product of the coefficients is (pi/2)^2, so the bound is 2*pi/(2*(pi/2)) = 2
    assert settle_time_bound_xi(math.pi / 2, math.pi / 2, 2.0) == pytest.approx(
        2.0, rel=1e-15
    )
    with pytest.raises(ValueError):
        settle_time_bound_xi(-1.0, 1.0, 2.0)


def test_step_budget_matches_ceiling_identity():
    rng = np.random.Generator(np.random.Philox(key=52))
    for _ in range(500):
        c1 = float(10.0 ** rng.uniform(-2, 2))
        c2 = float(10.0 ** rng.uniform(-2, 2))
        xi = float(rng.uniform(2.01, 300.0))
        eta = float(10.0 ** rng.uniform(-6, -2))
        assert step_budget(xi, eta, c1, c2) == math.ceil(
            settle_time_bound_xi(c1, c2, xi) / eta
        )


def test_continuous_envelope_branches():
    c1, c2, xi = 17.0, 30.0, 10.0
    bound = settle_time_bound_xi(c1, c2, xi)
    assert continuous_envelope(bound, c1, c2, xi, 0.5) == 0.0
    assert continuous_envelope(bound * 3, c1, c2, xi, 0.5) == 0.0
    assert continuous_envelope(bound * (1 - 1e-12), c1, c2, xi, 0.5) > 0.0
    assert continuous_envelope(0.0, c1, c2, xi, 0.5) == math.inf
    # midpoint closed form: tan(pi/4) = 1
    mid = continuous_envelope(bound / 2, c1, c2, xi, 0.5)
    assert mid == pytest.approx(math.sqrt(2.0) * (c1 / c2) ** (xi / 4), rel=1e-12)
    beta_mid = continuous_envelope(bound / 2, c1, c2, xi, 2.0)
    assert beta_mid == pytest.approx((c1 / c2) ** (xi / 4) / math.sqrt(2.0), rel=1e-12)


def test_continuous_envelope_monotone():
    c1, c2, xi = 17.0, 30.0, 10.0
    bound = settle_time_bound_xi(c1, c2, xi)
    ts = np.linspace(bound * 1e-4, bound, 1000)
    vals = [continuous_envelope(float(t), c1, c2, xi, 0.5) for t in ts]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_discrete_envelope_matches_continuous():
    c1, c2, xi, eta, floor = 17.0, 30.0, 10.0, 1e-4, 1e-9
    budget = step_budget(xi, eta, c1, c2)
    assert discrete_envelope(budget + 1, eta, c1, c2, xi, floor) == floor
    assert discrete_envelope(10 * budget, eta, c1, c2, xi, floor) == floor
    for k in (1, 3, budget // 2, budget - 1, budget):
        want = continuous_envelope(eta * k, c1, c2, xi, 0.5) + floor
        assert discrete_envelope(k, eta, c1, c2, xi, floor) == want
    # midpoint: eta chosen so that k eta is exactly half the bound
    bound = settle_time_bound_xi(c1, c2, xi)
    eta2 = bound / 1000.0
    got = discrete_envelope(500, eta2, c1, c2, xi, floor)
    assert got == pytest.approx(
        math.sqrt(2.0) * (c1 / c2) ** (xi / 4) + floor, rel=1e-12
    )
    assert discrete_envelope(0, eta, c1, c2, xi, floor) == math.inf


def test_window_inequality_random_suite():
    rng = np.random.Generator(np.random.Philox(key=53))
    for _ in range(10_000):
        c = float(rng.uniform(0.01, 0.99))
        lo, hi = alpha1_window(c)
        alpha = lo + (hi - lo) * float(rng.uniform(1e-6, 1.0 - 1e-6))
        assert ((1.0 - c) / (1.0 + c)) ** (1.0 - alpha) > c
        assert state_decay_coef(1.0, alpha, c) > 0.0


EX1_FLOW = FlowParams(lam=0.44, kappa1=20.0, kappa2=20.0, alpha1=0.8, alpha2=1.2)
EX2_FLOW = FlowParams(lam=0.005, kappa1=20.0, kappa2=200.0, alpha1=0.97, alpha2=1.03)


def test_certificate_example1_pipeline():
    cert = certificate_from_constants(11.0, 5.0, EX1_FLOW, 1e-4)
    assert cert.contraction == pytest.approx(C_EX1, rel=1e-15)
    assert cert.alpha1_window == (0.0, 1.0)
    assert cert.alpha1_certified
    assert min(cert.state_coef1, cert.state_coef2) > 0.0
    assert min(cert.lyap_coef1, cert.lyap_coef2) > 0.0
    assert cert.settle_bound == pytest.approx(settle_time_bound(EX1_FLOW, C_EX1))
    assert cert.xi == pytest.approx(10.0, rel=1e-12)
    want_budget = math.ceil(
        settle_time_bound_xi(cert.lyap_coef1, cert.lyap_coef2, cert.xi) / 1e-4
    )
    assert cert.step_budget == want_budget == 6829


def test_certificate_example2_flags_inconsistency():
    cert = certificate_from_constants(0.5, 0.5, EX2_FLOW, 1e-4)
    assert cert.contraction == pytest.approx(C_EX2, rel=1e-14)
    assert cert.alpha1_margin == pytest.approx(3.7239e-4, rel=1e-4)
    assert cert.alpha1_window[0] == pytest.approx(1.0 - 3.7239e-4, rel=1e-7)
    assert not cert.alpha1_certified
    assert cert.state_coef1 < 0.0
    assert cert.settle_bound is None
    assert cert.step_budget is None
    assert cert.xi == pytest.approx(200.0 / 3.0, rel=1e-12)
    with pytest.raises(UncertifiedAlpha1Error):
        cert.discrete_envelope(5, 1e-9)


def test_certificate_requires_constants():
    problem = MviProblem(operator=lambda x: x, prox=zero_function())
    disc = DiscretizationParams(eta=1e-4, max_steps=100)
    with pytest.raises(MissingCertificatesError):
        certificate(problem, EX1_FLOW, disc)


def test_certificate_estimated_flag_passthrough():
    cert = certificate_from_constants(11.0, 5.0, EX1_FLOW, 1e-4, estimated=True)
    assert cert.estimated_constants
