import math

import numpy as np
import pytest

from fxtmvi.core import (
    DimensionMismatchError,
    DiscretizationParams,
    FlowParams,
    IterateRecord,
    MviProblem,
    NonFiniteError,
    RunLog,
    as_vector,
    euclidean_norm,
    validate_problem,
)
from fxtmvi.prox import zero_function


def test_norm_known_values():
    assert euclidean_norm(np.array([0.0, 0.0])) == 0.0
    assert euclidean_norm(np.array([3.0, 4.0])) == 5.0
    assert euclidean_norm(np.ones(100)) == pytest.approx(10.0, abs=1e-12)


def test_norm_axioms_random():
    rng = np.random.Generator(np.random.Philox(key=11))
    for _ in range(300):
        n = int(rng.integers(1, 40))
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        s = float(rng.normal())
        nu, nv = euclidean_norm(u), euclidean_norm(v)
        scale = max(1.0, nu + nv)
        assert euclidean_norm(u + v) <= nu + nv + 1e-12 * scale
        assert abs(euclidean_norm(s * u) - abs(s) * nu) <= 1e-12 * scale * abs(s)
        assert nu >= 0.0
        if np.any(u != 0.0):
            assert nu > 0.0


def test_norm_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        euclidean_norm(np.array([1.0, np.nan]))
    with pytest.raises(NonFiniteError):
        euclidean_norm(np.array([np.inf]))


def test_as_vector_validation():
    v = as_vector([1.0, 2.0])
    assert not v.flags.writeable
    with pytest.raises(DimensionMismatchError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(DimensionMismatchError):
        as_vector([1.0, 2.0], dim=3)
    with pytest.raises(NonFiniteError):
        as_vector([1.0, np.inf])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(lam=0.0),
        dict(lam=-1.0),
        dict(kappa1=0.0),
        dict(kappa2=-2.0),
        dict(alpha1=0.0),
        dict(alpha1=1.0),
        dict(alpha1=1.3),
        dict(alpha2=1.0),
        dict(alpha2=0.5),
    ],
)
def test_flow_params_rejects_out_of_range(kwargs):
    good = dict(lam=0.44, kappa1=20.0, kappa2=20.0, alpha1=0.8, alpha2=1.2)
    good.update(kwargs)
    with pytest.raises(ValueError):
        FlowParams(**good)


def test_flow_params_unchecked_constructor():
    fp = FlowParams._unchecked(lam=0.44, kappa1=3.0, kappa2=0.0, alpha1=1.0, alpha2=1.2)
    assert fp.alpha1 == 1.0 and fp.kappa2 == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(eta=0.0),
        dict(eta=-1e-4),
        dict(max_steps=0),
        dict(max_steps=2.5),
        dict(stop_residual=-1e-9),
        dict(fix_threshold=0.0),
    ],
)
def test_disc_params_rejects_out_of_range(kwargs):
    good = dict(eta=1e-4, max_steps=1000, stop_residual=0.0, fix_threshold=1e-13)
    good.update(kwargs)
    with pytest.raises(ValueError):
        DiscretizationParams(**good)


def test_iterate_record_consistency():
    err = 0.3
    rec = IterateRecord(k=0, t=0.0, residual=1.0, error=err, lyapunov=0.5 * err * err)
    assert rec.lyapunov == pytest.approx(0.5 * rec.error**2, rel=1e-12)
    with pytest.raises(ValueError):
        IterateRecord(k=0, t=0.0, residual=1.0, error=0.3, lyapunov=0.1)
    with pytest.raises(ValueError):
        IterateRecord(k=0, t=0.0, residual=-1.0)
    with pytest.raises(ValueError):
        IterateRecord(k=0, t=0.0, residual=1.0, error=0.3, lyapunov=None)


def test_runlog_validation():
    disc = DiscretizationParams(eta=1e-4, max_steps=10)
    recs = [
        IterateRecord(k=0, t=0.0, residual=1.0),
        IterateRecord(k=5, t=5e-4, residual=0.5),
    ]
    log = RunLog(records=recs, rhs=None, disc=disc, termination="step_cap")
    assert log.steps == 5
    assert log.final.residual == 0.5
    with pytest.raises(ValueError):
        RunLog(records=list(reversed(recs)), rhs=None, disc=disc, termination="step_cap")
    with pytest.raises(ValueError):
        RunLog(records=recs, rhs=None, disc=disc, termination="giving_up")


def _problem(mu=None, lip=None, monotonicity="strong"):
    return MviProblem(
        operator=lambda x: x,
        prox=zero_function(),
        mu=mu,
        lip=lip,
        monotonicity=monotonicity,
    )


def test_problem_modulus_ordering():
    with pytest.raises(ValueError):
        _problem(mu=11.0, lip=5.0)
    # a pseudomonotonicity modulus may legitimately exceed the Lipschitz constant
    p = _problem(mu=11.0, lip=5.0, monotonicity="strong_pseudo")
    assert p.mu == 11.0
    with pytest.raises(ValueError):
        _problem(mu=-1.0, lip=5.0)
    with pytest.raises(ValueError):
        _problem(mu=1.0, lip=1.0, monotonicity="sideways")


def _flow(lam, alpha1=0.8):
    return FlowParams(lam=lam, kappa1=20.0, kappa2=20.0, alpha1=alpha1, alpha2=1.2)


def test_validate_problem_windows():
    report = validate_problem(
        _problem(mu=11.0, lip=5.0, monotonicity="strong_pseudo"), _flow(0.44)
    )
    assert report.lambda_window == pytest.approx((0.0, 0.88))
    assert report.lambda_ok and report.alpha1_ok and report.ok

    report = validate_problem(_problem(mu=0.5, lip=0.5), _flow(0.005))
    assert report.lambda_window == pytest.approx((0.0, 4.0))
    assert report.lambda_ok

    # boundary of the open interval fails
    report = validate_problem(_problem(mu=1.0, lip=1.0), _flow(2.0))
    assert report.lambda_window == pytest.approx((0.0, 2.0))
    assert report.lambda_ok is False and report.ok is False


def test_validate_problem_degrades_without_constants():
    report = validate_problem(_problem(), _flow(0.44))
    assert not report.checkable
    assert any("missing_certificates" in r for r in report.reasons)


def test_validate_problem_flags_uncertified_alpha1():
    flow = FlowParams(lam=0.005, kappa1=20.0, kappa2=200.0, alpha1=0.97, alpha2=1.03)
    report = validate_problem(_problem(mu=0.5, lip=0.5), flow)
    assert report.lambda_ok is True
    assert report.alpha1_ok is False
    assert math.isclose(report.alpha1_window[0], 1.0 - 3.7239e-4, rel_tol=1e-3)
