"""Operator instances, dataset generation, and empirical constant estimators."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .core import DimensionMismatchError, as_vector

__all__ = [
    "Dataset",
    "elasticnet_logistic_operator",
    "elasticnet_smooth_objective",
    "estimate_lipschitz",
    "estimate_strong_monotonicity",
    "example1_operator",
    "generate_dataset",
    "load_dataset",
    "sample_rng",
    "saddle_operator",
    "save_dataset",
]


@dataclass(frozen=True)
class Dataset:
    """Labeled sample set for the regularized logistic regression problem."""

    labels: np.ndarray    # shape (n,), entries exactly -1.0 or +1.0
    features: np.ndarray  # shape (n, d)
    seed: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=float)
        features = np.asarray(self.features, dtype=float)
        if labels.ndim != 1 or features.ndim != 2:
            raise ValueError("labels must be 1-D and features 2-D")
        if labels.shape[0] != features.shape[0]:
            raise ValueError("labels and features must have equal length")
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("every label must be exactly -1 or +1")
        labels = labels.copy()
        features = features.copy()
        labels.flags.writeable = False
        features.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "features", features)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def sample_rng(seed: int) -> np.random.Generator:
    """Seeded generator backed by the Philox 64-bit counter-based PRNG.

    Philox is pinned (rather than numpy's default bit generator) because it
    has a published reference implementation, so streams can be reproduced
    outside numpy from the seed alone.
    """
    return np.random.Generator(np.random.Philox(key=seed))


def generate_dataset(seed: int, n: int = 100, d: int = 3) -> Dataset:
    """Draw ``n`` features i.i.d. uniform on [0, 1]^d and fair +-1 labels.

    Deterministic for a fixed seed; see ``sample_rng``.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = sample_rng(seed)
    features = rng.random((n, d))
    labels = 2.0 * rng.integers(0, 2, size=n) - 1.0
    return Dataset(labels=labels, features=features, seed=seed)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write one record per line: ``label feature_1 ... feature_d``.

    Floats use 17 significant digits so a round trip is bit-exact.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# seed={dataset.seed} n={dataset.n} d={dataset.dim}\n")
        for label, row in zip(dataset.labels, dataset.features):
            cols = " ".join(format(v, ".17g") for v in row)
            fh.write(f"{int(label)} {cols}\n")


def load_dataset(path: str | Path) -> Dataset:
    """Read a file produced by ``save_dataset``."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# "):
            raise ValueError(f"{path}: missing '# seed=... n=... d=...' header")
        meta = dict(item.split("=", 1) for item in header[2:].split())
        labels, rows = [], []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            labels.append(float(parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return Dataset(
        labels=np.array(labels),
        features=np.array(rows),
        seed=int(meta["seed"]),
    )


def example1_operator(x: np.ndarray) -> np.ndarray:
    """Two-dimensional strongly pseudomonotone benchmark operator."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DimensionMismatchError("example1_operator expects dimension 2")
    return np.array(
        [
            0.5 * x[0] * x[1] - 2.0 * x[1] - 1e7,
            0.1 * x[1] ** 2 - 4.0 * x[0] - 1e7,
        ]
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # exp is only taken of non-positive arguments, so large |z| cannot overflow
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def elasticnet_logistic_operator(
    dataset: Dataset, beta2: float
) -> Callable[[np.ndarray], np.ndarray]:
    """Gradient of the smooth part of the elastic-net logistic objective.

    Returns ``F(x) = sum_i -a_i b_i sigmoid(-a_i b_i^T x) + 2 beta2 x`` as a
    closure over the dataset; safe to evaluate far from the optimum.
    """
    if not beta2 > 0:
        raise ValueError("beta2 must be positive")
    signed = dataset.labels[:, None] * dataset.features  # a_i b_i, shape (n, d)
    dim = dataset.dim

    def operator(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (dim,):
            raise DimensionMismatchError(f"operator expects dimension {dim}")
        weights = _sigmoid(-(signed @ x))
        return -(signed.T @ weights) + 2.0 * beta2 * x

    return operator


def elasticnet_smooth_objective(
    dataset: Dataset, beta2: float
) -> Callable[[np.ndarray], float]:
    """Smooth part of the elastic-net logistic objective (for diagnostics).

    ``f(x) = sum_i log(1 + exp(-a_i b_i^T x)) + beta2 ||x||^2``, evaluated
    through ``logaddexp`` so saturated samples cannot overflow.
    """
    if not beta2 > 0:
        raise ValueError("beta2 must be positive")
    signed = dataset.labels[:, None] * dataset.features

    def objective(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        z = signed @ x
        return float(np.logaddexp(0.0, -z).sum() + beta2 * (x @ x))

    return objective


def saddle_operator(
    grad_x1: Callable[[np.ndarray, np.ndarray], np.ndarray],
    grad_x2: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n1: int,
    n2: int,
) -> Callable[[np.ndarray], np.ndarray]:
    """Stack the two block gradients of a convex-concave function.

    The returned operator takes the concatenated point, splits it at ``n1``,
    and evaluates ``(grad_x1, -grad_x2)``; its zeros are the saddle points.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("block dimensions must be at least 1")

    def operator(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (n1 + n2,):
            raise DimensionMismatchError(f"operator expects dimension {n1 + n2}")
        x1, x2 = z[:n1], z[n1:]
        g1 = np.asarray(grad_x1(x1, x2), dtype=float).reshape(-1)
        g2 = np.asarray(grad_x2(x1, x2), dtype=float).reshape(-1)
        if g1.shape != (n1,) or g2.shape != (n2,):
            raise DimensionMismatchError("block gradient dimensions do not match")
        return np.concatenate([g1, -g2])

    return operator


def _sample_pairs(lo, hi, sample_pairs, seed, dim=None):
    lo = as_vector(lo, dim)
    hi = as_vector(hi, dim)
    if lo.shape != hi.shape:
        raise DimensionMismatchError("box bounds must share a dimension")
    rng = sample_rng(seed)
    n = lo.shape[0]
    xs = lo + (hi - lo) * rng.random((sample_pairs, n))
    zs = lo + (hi - lo) * rng.random((sample_pairs, n))
    return xs, zs


def estimate_lipschitz(
    operator, sample_pairs: int, lo, hi, seed: int = 0
) -> float:
    """Sampled lower bound on the Lipschitz constant over a box.

    Heuristic diagnostic only: the max of ||F(x)-F(z)|| / ||x-z|| over
    random pairs never exceeds the true constant, so it cannot certify one.
    """
    if sample_pairs < 1:
        raise ValueError("sample_pairs must be at least 1")
    xs, zs = _sample_pairs(lo, hi, sample_pairs, seed)
    best = 0.0
    for x, z in zip(xs, zs):
        dx = x - z
        denom = float(dx @ dx)
        if denom == 0.0:
            continue
        df = operator(x) - operator(z)
        best = max(best, float(np.sqrt((df @ df) / denom)))
    return best


def estimate_strong_monotonicity(
    operator, sample_pairs: int, lo, hi, seed: int = 0
) -> float:
    """Sampled upper bound on the strong-monotonicity modulus over a box.

    Heuristic diagnostic only: the min of <F(x)-F(z), x-z> / ||x-z||^2 over
    random pairs never falls below the true modulus of a monotone operator.
    """
    if sample_pairs < 1:
        raise ValueError("sample_pairs must be at least 1")
    xs, zs = _sample_pairs(lo, hi, sample_pairs, seed)
    best = np.inf
    for x, z in zip(xs, zs):
        dx = x - z
        denom = float(dx @ dx)
        if denom == 0.0:
            continue
        df = operator(x) - operator(z)
        best = min(best, float(df @ dx) / denom)
    return best
