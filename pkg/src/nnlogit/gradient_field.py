"""Local gradient estimates of the logit at query points."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .local_logistic import LocalProblem, SolverOptions, fit_penalized
from .neighbors import NeighborIndex
from .rng import as_stream, uniform_choice

MIN_CLASS_COUNT = 5


@dataclass(frozen=True)
class GradientEstimate:
    center: np.ndarray
    intercept: float
    gradient: np.ndarray
    skipped: bool = False
    reason: str = ""

    @property
    def pi_hat(self) -> float:
        a = self.intercept
        return 1.0 / (1.0 + math.exp(-a)) if a >= 0 else math.exp(a) / (1.0 + math.exp(a))

    @property
    def grad_pi_hat(self) -> np.ndarray:
        pi = self.pi_hat
        return pi * (1.0 - pi) * self.gradient


def default_k(n: int) -> int:
    return max(1, math.isqrt(n))


def default_m(n: int) -> int:
    return max(1, math.ceil(n / 4))


def _skip(x, p, reason):
    return GradientEstimate(np.asarray(x, dtype=float), math.nan, np.full(p, math.nan), True, reason)


def estimate_from_neighbors(dataset: Dataset, x, neighbor_idx, lam: float,
                            min_class: int = MIN_CLASS_COUNT,
                            opts: SolverOptions | None = None) -> GradientEstimate:
    y = dataset.labels[neighbor_idx]
    n1 = int(y.sum())
    n0 = len(y) - n1
    if min(n0, n1) < min_class:
        return _skip(x, dataset.p, f"class counts ({n0}, {n1}) below {min_class}")
    problem = LocalProblem.from_neighbors(dataset.covariates, dataset.labels, neighbor_idx, x, lam)
    fit = fit_penalized(problem, opts)
    if fit.degenerate:
        return _skip(x, dataset.p, "degenerate local fit (separable neighborhood)")
    if not np.all(np.isfinite(fit.gradient)):
        return _skip(x, dataset.p, "non-finite local fit")
    return GradientEstimate(np.asarray(x, dtype=float), fit.intercept, fit.gradient)


def estimate_at(dataset: Dataset, index: NeighborIndex, x, k: int, lam: float,
                min_class: int = MIN_CLASS_COUNT,
                opts: SolverOptions | None = None) -> GradientEstimate:
    """Fit the penalized local logistic model on the ``k`` neighbors of ``x``.

    Neighborhoods where either class has fewer than ``min_class`` members
    are skipped, as are fits that hit the separability cap.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    nbrs = index.query(x, k)
    return estimate_from_neighbors(dataset, x, nbrs.indices, lam, min_class, opts)


def estimate_field(dataset: Dataset, m: int | None = None, k: int | None = None,
                   lam: float = 0.0, seed=0, index: NeighborIndex | None = None,
                   min_class: int = MIN_CLASS_COUNT,
                   opts: SolverOptions | None = None) -> list[GradientEstimate]:
    """Estimates at ``m`` data points drawn without replacement, in draw order."""
    n = dataset.n
    m = default_m(n) if m is None else m
    k = default_k(n) if k is None else k
    if m > n or m < 1:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    index = index or NeighborIndex(dataset.covariates)
    draws = uniform_choice(as_stream(seed), n, m)
    centers = dataset.covariates[draws]
    nbr_idx, _ = index.query_many(centers, k)
    return [estimate_from_neighbors(dataset, centers[r], nbr_idx[r], lam, min_class, opts)
            for r in range(m)]
