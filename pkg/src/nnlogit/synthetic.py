"""Simulated binary-response designs with known central subspaces.

Covariates are i.i.d. standard Gaussian. Responses:

1. ``Y ~ Bernoulli(expit(X1 + 1))``
2. ``Y = 1{sin(X1) + X2**2 + 0.2 eps >= 0}``
3. ``Y = 1{(X1 + 0.5) (X2 - 0.5)**2 + 0.2 eps >= 0}``
4. ``Y = 1{log(X1**2) (X2**2 + X3) + 0.2 eps >= 0}``

with ``eps ~ N(0, 1)``; a sign of exactly zero maps to label 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .rng import RandomStream, as_stream, gaussian, uniform

TRUE_DIM = {1: 1, 2: 2, 3: 2, 4: 3}
EXAMPLE1_OFFSET = 1.0


@dataclass(frozen=True)
class SyntheticSpec:
    example_id: int
    n: int
    p: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.example_id not in TRUE_DIM:
            raise ValueError(f"example_id must be one of {sorted(TRUE_DIM)}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.p < 8:
            raise ValueError("the simulated designs use p >= 8")


@dataclass(frozen=True)
class OracleInfo:
    basis: np.ndarray
    true_d: int

    def logit_gradient(self, x) -> np.ndarray | None:
        return None

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def to_json(self) -> dict:
        return {"true_d": self.true_d, "basis": self.basis.T.tolist()}


@dataclass(frozen=True)
class LogisticOracle(OracleInfo):
    """Example 1: the logit is ``x1 + 1``, so its gradient is ``e1`` everywhere."""

    def logit(self, x) -> np.ndarray:
        x = np.atleast_2d(x)
        return x[:, 0] + EXAMPLE1_OFFSET

    def logit_gradient(self, x) -> np.ndarray:
        g = np.zeros(self.basis.shape[0])
        g[0] = 1.0
        return g


def oracle_for(example_id: int, p: int) -> OracleInfo:
    d = TRUE_DIM[example_id]
    basis = np.eye(p)[:, :d]
    cls = LogisticOracle if example_id == 1 else OracleInfo
    return cls(basis, d)


def _log_square(x1):
    tiny = np.finfo(float).tiny
    safe = np.where(x1 == 0.0, tiny, x1)
    # 2 log|x| rather than log(x * x): the square of tiny underflows
    return 2.0 * np.log(np.abs(safe))


def labels_from(example_id: int, X: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Labels from covariates and the per-row noise draw.

    ``noise`` is uniform on [0, 1) for example 1 and standard Gaussian otherwise.
    """
    x1 = X[:, 0]
    if example_id == 1:
        prob = 1.0 / (1.0 + np.exp(-(x1 + EXAMPLE1_OFFSET)))
        return (noise < prob).astype(np.int64)
    x2 = X[:, 1]
    if example_id == 2:
        s = np.sin(x1) + x2 ** 2 + 0.2 * noise
    elif example_id == 3:
        s = (x1 + 0.5) * (x2 - 0.5) ** 2 + 0.2 * noise
    elif example_id == 4:
        s = _log_square(x1) * (x2 ** 2 + X[:, 2]) + 0.2 * noise
    else:
        raise ValueError(f"unknown example {example_id}")
    return (s >= 0).astype(np.int64)


def draw_noise(example_id: int, stream: RandomStream, n: int) -> np.ndarray:
    return uniform(stream, n) if example_id == 1 else gaussian(stream, n)


def simulate(example_id: int, n: int, p: int, stream: RandomStream) -> tuple[Dataset, OracleInfo]:
    """Draw one sample. No lower bound on ``p`` (the rate harness uses ``p = 1``)."""
    if example_id not in TRUE_DIM:
        raise ValueError(f"example_id must be one of {sorted(TRUE_DIM)}")
    if p < TRUE_DIM[example_id]:
        raise ValueError(f"example {example_id} needs p >= {TRUE_DIM[example_id]}")
    X = gaussian(stream.child(0), (n, p))
    noise = draw_noise(example_id, stream.child(1), n)
    y = labels_from(example_id, X, noise)
    names = tuple(f"x{j + 1}" for j in range(p))
    return Dataset(X, y, names), oracle_for(example_id, p)


def generate(spec: SyntheticSpec, stream: RandomStream | None = None) -> tuple[Dataset, OracleInfo]:
    stream = stream if stream is not None else as_stream(spec.seed)
    return simulate(spec.example_id, spec.n, spec.p, stream)
