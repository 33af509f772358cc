"""Shared fixtures and independent brute-force oracles for the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

from fxtmvi import bench
from fxtmvi.analysis import certificate
from fxtmvi.bench import build_example1, build_example2, reference_solution, with_reference

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ExampleBundle:
    preset: bench.ExperimentPreset
    problem: object          # preset problem with the oracle reference attached
    reference: np.ndarray
    cert: object


@pytest.fixture(scope="session")
def ex1() -> ExampleBundle:
    preset = build_example1()
    ref = reference_solution(preset.problem, preset.flow.lam, x0=np.zeros(2))
    return ExampleBundle(
        preset=preset,
        problem=with_reference(preset.problem, ref),
        reference=ref,
        cert=certificate(preset.problem, preset.flow, preset.disc),
    )


@pytest.fixture(scope="session")
def ex2() -> ExampleBundle:
    preset = build_example2()
    ref = reference_solution(preset.problem, preset.flow.lam, x0=np.zeros(3))
    return ExampleBundle(
        preset=preset,
        problem=with_reference(preset.problem, ref),
        reference=ref,
        cert=certificate(preset.problem, preset.flow, preset.disc),
    )


# --------------------------------------------------------------------------
# brute-force minimizers, independent of the library's closed forms

def golden_min_scalar(f, lo: float, hi: float, width_tol: float = 1e-12) -> float:
    """Golden-section minimizer of a unimodal scalar function on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def ball_projection_oracle(x, center, radius) -> np.ndarray:
    """Nearest point of a 2-D disk by brute force over the boundary angle.

    Interior points are their own projection; for exterior points the
    minimizer lies on the circle, located by a coarse angular grid followed
    by golden-section refinement.  Never uses the radial closed form.
    """
    x = np.asarray(x, float)
    center = np.asarray(center, float)
    if np.linalg.norm(x - center) <= radius:
        return x.copy()

    def dist2(theta):
        p = center + radius * np.array([np.cos(theta), np.sin(theta)])
        return float((x - p) @ (x - p))

    thetas = np.linspace(0.0, 2.0 * math.pi, 4097)
    best = thetas[int(np.argmin([dist2(t) for t in thetas]))]
    span = 2.0 * math.pi / 4096
    theta = golden_min_scalar(dist2, best - span, best + span, width_tol=1e-14)
    return center + radius * np.array([math.cos(theta), math.sin(theta)])


def box_projection_oracle(x, lo, hi) -> np.ndarray:
    """Componentwise nearest point of a box by golden-section search."""
    x = np.asarray(x, float)
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        if lo[i] == hi[i]:
            out[i] = lo[i]
            continue
        out[i] = golden_min_scalar(
            lambda y, xi=x[i]: (xi - y) ** 2, lo[i], hi[i], width_tol=1e-12
        )
    return out
