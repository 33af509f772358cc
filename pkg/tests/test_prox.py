import numpy as np
import pytest

from conftest import ball_projection_oracle, box_projection_oracle
from fxtmvi.core import DimensionMismatchError, NonFiniteError
from fxtmvi.prox import (
    ball_indicator,
    box_indicator,
    l1_penalty,
    project_ball,
    project_box,
    prox_l1,
    prox_oracle_separable,
    prox_zero,
    zero_function,
)


def test_prox_l1_known_values():
    assert np.array_equal(prox_l1(np.zeros(3), 1.0), np.zeros(3))
    assert np.allclose(prox_l1(np.array([3.0, -0.5]), 1.0), [2.0, 0.0])
    # exact tie maps to exactly zero
    assert prox_l1(np.array([0.7]), 0.7)[0] == 0.0
    with pytest.raises(ValueError):
        prox_l1(np.ones(2), 0.0)


def test_prox_l1_matches_bruteforce_oracle():
    rng = np.random.Generator(np.random.Philox(key=21))
    xs = rng.uniform(-4.0, 4.0, size=3000)
    taus = 10.0 ** rng.uniform(-2.5, 0.4, size=3000)
    want = np.array([prox_l1(np.array([x]), t)[0] for x, t in zip(xs, taus)])
    got = prox_oracle_separable(np.abs, xs, taus)
    assert np.max(np.abs(got - want)) <= 1e-8


def test_project_ball_known_values():
    center = np.array([2.0, 2.0])
    assert np.array_equal(project_ball(np.array([2.0, 2.0]), center, 1.0), center)
    assert np.allclose(project_ball(np.array([4.0, 2.0]), center, 1.0), [3.0, 2.0])
    assert np.allclose(
        project_ball(np.array([5.0, 6.0]), center, 1.0), [2.6, 2.8], atol=1e-12
    )
    with pytest.raises(ValueError):
        project_ball(np.zeros(2), center, 0.0)
    with pytest.raises(DimensionMismatchError):
        project_ball(np.zeros(3), center, 1.0)


def test_project_ball_matches_bruteforce_oracle():
    center = np.array([2.0, 2.0])
    got = project_ball(np.array([5.0, 6.0]), center, 1.0)
    want = ball_projection_oracle(np.array([5.0, 6.0]), center, 1.0)
    assert np.max(np.abs(got - want)) <= 1e-8


def test_project_ball_feasible_and_idempotent():
    rng = np.random.Generator(np.random.Philox(key=22))
    center = np.array([2.0, 2.0])
    for _ in range(1000):
        x = rng.uniform(-50.0, 50.0, 2)
        p = project_ball(x, center, 1.0)
        assert np.linalg.norm(p - center) <= 1.0 + 1e-12
        assert np.array_equal(project_ball(p, center, 1.0), p)


def test_project_box_known_values():
    assert project_box(np.array([0.5]), np.array([0.0]), np.array([1.0]))[0] == 0.5
    assert np.array_equal(
        project_box(np.array([-2.0, 3.0]), np.zeros(2), np.ones(2)), [0.0, 1.0]
    )
    with pytest.raises(DimensionMismatchError):
        project_box(np.zeros(3), np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        project_box(np.zeros(2), np.ones(2), np.zeros(2))


def test_project_box_matches_clamp_oracle():
    rng = np.random.Generator(np.random.Philox(key=23))
    for _ in range(200):
        lo = rng.uniform(-3.0, 0.0, 4)
        hi = lo + rng.uniform(0.0, 3.0, 4)
        x = rng.uniform(-5.0, 5.0, 4)
        got = project_box(x, lo, hi)
        assert np.max(np.abs(got - box_projection_oracle(x, lo, hi))) <= 1e-8
        assert np.array_equal(project_box(got, lo, hi), got)


def test_prox_zero_is_identity():
    for x in ([1.0, 2.0], [0.0], [-3.5, 0.0, 7.0]):
        assert np.array_equal(prox_zero(np.array(x)), np.array(x))


def test_oracle_known_prox_values():
    got = prox_oracle_separable(np.abs, np.array([3.0]), 1.0)
    assert abs(got[0] - 2.0) <= 1e-8
    got = prox_oracle_separable(lambda y: np.zeros_like(y), np.array([7.0]), 5.0)
    assert abs(got[0] - 7.0) <= 1e-8
    got = prox_oracle_separable(lambda y: 0.5 * y * y, np.array([4.0]), 1.0)
    assert abs(got[0] - 2.0) <= 1e-8


def test_oracle_rejects_nonfinite_g():
    def bad(y):
        return np.where(y > 3.0, np.nan, np.abs(y))

    with pytest.raises(NonFiniteError):
        prox_oracle_separable(bad, np.array([3.0]), 1.0)


def test_handles_nonexpansive():
    rng = np.random.Generator(np.random.Philox(key=24))
    cases = [
        (l1_penalty(2.5), 3),
        (ball_indicator([2.0, 2.0], 1.0), 2),
        (box_indicator([-1.0, -2.0], [1.0, 0.5]), 2),
        (zero_function(), 4),
    ]
    for handle, dim in cases:
        for _ in range(400):
            x = rng.uniform(-10.0, 10.0, dim)
            z = rng.uniform(-10.0, 10.0, dim)
            tau = float(10.0 ** rng.uniform(-2.0, 0.3))
            lhs = np.linalg.norm(handle(tau, x) - handle(tau, z))
            assert lhs <= np.linalg.norm(x - z) + 1e-12


def test_l1_handle_thresholds_at_scaled_weight():
    handle = l1_penalty(2.5)
    x = np.array([0.02, -0.005, 0.0125])
    assert np.array_equal(handle(0.005, x), prox_l1(x, 0.0125))


def test_handle_validation():
    with pytest.raises(ValueError):
        l1_penalty(0.0)
    with pytest.raises(ValueError):
        ball_indicator([0.0, 0.0], -1.0)
    with pytest.raises(ValueError):
        box_indicator([1.0], [0.0])
    assert ball_indicator([0.0], 1.0).kind == "ball_indicator"
    assert zero_function().kind == "zero"
