"""L1-penalized local logistic regression around a center point.

The public surface speaks the unscaled problem

    maximize  L(a, b) - lam * ||b||_1,
    L(a, b) = sum_i  y_i (a + b.(x_i - x)) - log(1 + exp(a + b.(x_i - x))),

over the neighbors ``x_i`` of a center ``x``. Internally the solver centers
and scales the columns of the local design and divides the loss by ``k``;
the per-column penalty is rescaled so the solved problem is exactly the one
above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._kernels_numpy import expit

ETA_CAP = 30.0
W_FLOOR = 1e-5


@dataclass(frozen=True)
class LocalProblem:
    center: np.ndarray
    deltas: np.ndarray
    labels: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        deltas = np.atleast_2d(np.asarray(self.deltas, dtype=float))
        labels = np.asarray(self.labels, dtype=float).reshape(-1)
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if deltas.shape[0] != labels.shape[0] or deltas.shape[0] < 1:
            raise ValueError("deltas and labels must have the same, nonzero, number of rows")
        if center.shape[0] != deltas.shape[1]:
            raise ValueError("center dimension does not match deltas")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        if not np.all(np.isfinite(deltas)):
            raise ValueError("deltas must be finite")
        if not (self.lam >= 0 and np.isfinite(self.lam)):
            raise ValueError("lam must be a finite nonnegative number")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "center", center)

    @classmethod
    def from_neighbors(cls, X, y, indices, center, lam=0.0) -> "LocalProblem":
        center = np.asarray(center, dtype=float)
        return cls(center, X[indices] - center, y[indices], lam)

    @property
    def k(self) -> int:
        return self.deltas.shape[0]

    @property
    def p(self) -> int:
        return self.deltas.shape[1]

    def with_lambda(self, lam: float) -> "LocalProblem":
        return LocalProblem(self.center, self.deltas, self.labels, lam)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    coef_tol: float = 1e-8
    max_sweeps: int = 10_000
    inner_tol: float = 1e-20


@dataclass
class LocalFit:
    intercept: float
    gradient: np.ndarray
    objective: float
    iterations: int
    converged: bool
    degenerate: bool = False
    history: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


def _linear_predictor(problem, a, b):
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != problem.p:
        raise ValueError(f"b has length {b.shape[0]}, expected {problem.p}")
    return a + problem.deltas @ b


def neg_loglik(problem: LocalProblem, a: float, b) -> float:
    """``-L(a, b)`` computed as ``sum softplus(eta) - y eta`` without overflow."""
    eta = _linear_predictor(problem, a, b)
    signed = np.where(problem.labels > 0.5, -eta, eta)
    return float(np.logaddexp(0.0, signed).sum())


def penalized_objective(problem: LocalProblem, a: float, b) -> float:
    """``L(a, b) - lam ||b||_1``, the quantity the estimator maximizes."""
    return -neg_loglik(problem, a, b) - problem.lam * float(np.abs(b).sum())


def score(problem: LocalProblem, a: float, b) -> tuple[float, np.ndarray]:
    """Gradient of ``L`` with respect to ``(a, b)``."""
    eta = _linear_predictor(problem, a, b)
    resid = np.where(problem.labels > 0.5, expit(-eta), -expit(eta))
    return float(resid.sum()), problem.deltas.T @ resid


def soft_threshold(z, gamma):
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("gamma must be nonnegative")
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def _label_counts(labels):
    n1 = int(np.count_nonzero(labels > 0.5))
    return n1, labels.shape[0] - n1


def lambda_max(problem: LocalProblem) -> float:
    """Smallest penalty at which ``b = 0`` is optimal."""
    n1, n0 = _label_counts(problem.labels)
    if n1 == 0 or n0 == 0:
        raise ValueError("lambda_max is undefined for constant labels")
    ybar = n1 / problem.k
    return float(np.max(np.abs((problem.labels - ybar) @ problem.deltas)))


@dataclass(frozen=True)
class _Design:
    Z: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    active: np.ndarray


def _standardize(deltas):
    mean = deltas.mean(axis=0)
    centered = deltas - mean
    sd = np.sqrt((centered * centered).mean(axis=0))
    scale = np.maximum(np.abs(deltas).max(axis=0), 1.0)
    active = sd > 1e-12 * scale
    safe = np.where(active, sd, 1.0)
    Z = np.ascontiguousarray(np.where(active, centered / safe, 0.0))
    return _Design(Z, mean, safe, active)


def _logit_mean(labels):
    n1, n0 = _label_counts(labels)
    return np.log(n1) - np.log(n0)


def fit_penalized(problem: LocalProblem, opts: SolverOptions | None = None,
                  init: LocalFit | None = None, _design: _Design | None = None) -> LocalFit:
    """Maximize ``L(a, b) - lam ||b||_1``; the intercept is unpenalized.

    Constant labels have no finite maximizer; the returned fit saturates the
    intercept at the linear-predictor cap and is flagged ``degenerate``.
    Separable neighborhoods are handled the same way once ``|eta|`` would
    exceed the cap.
    """
    opts = opts or SolverOptions()
    k, p = problem.k, problem.p
    n1, n0 = _label_counts(problem.labels)
    if n1 == 0 or n0 == 0:
        a = ETA_CAP if n0 == 0 else -ETA_CAP
        b = np.zeros(p)
        return LocalFit(a, b, penalized_objective(problem, a, b), 0, False, True)

    design = _design if _design is not None else _standardize(problem.deltas)
    pen = np.where(design.active, problem.lam / (k * design.sd), 0.0)
    if init is None:
        a0 = _logit_mean(problem.labels)
        beta0 = np.zeros(p)
    else:
        beta0 = np.where(design.active, init.gradient * design.sd, 0.0)
        a0 = init.intercept + float(init.gradient @ design.mean)

    a_c, beta, sweeps, converged, degenerate, history = _backend.kernels().prox_newton_cd(
        design.Z, problem.labels, pen, design.active, float(a0), beta0,
        opts.tol, opts.coef_tol, int(opts.max_sweeps), ETA_CAP, W_FLOOR, opts.inner_tol,
    )
    b = np.where(design.active, np.asarray(beta) / design.sd, 0.0)
    a = float(a_c) - float(b @ design.mean)
    return LocalFit(
        intercept=a,
        gradient=b,
        objective=penalized_objective(problem, a, b),
        iterations=int(sweeps),
        converged=bool(converged),
        degenerate=bool(degenerate),
        history=-np.asarray(history) * k,
    )


def fit_path(problem: LocalProblem, lambdas, opts: SolverOptions | None = None) -> list[LocalFit]:
    """Warm-started fits along ``lambdas`` (usually decreasing)."""
    design = _standardize(problem.deltas)
    fits = []
    prev = None
    for lam in lambdas:
        fit = fit_penalized(problem.with_lambda(float(lam)), opts, init=prev, _design=design)
        fits.append(fit)
        prev = None if fit.degenerate else fit
    return fits


def kkt_violation(problem: LocalProblem, fit: LocalFit) -> float:
    """Largest violation of the subgradient optimality conditions (sum scale)."""
    ga, gb = score(problem, fit.intercept, fit.gradient)
    worst = abs(ga)
    lam = problem.lam
    for j in range(problem.p):
        bj = fit.gradient[j]
        if bj == 0.0:
            worst = max(worst, abs(gb[j]) - lam)
        else:
            worst = max(worst, abs(gb[j] - lam * np.sign(bj)))
    return float(max(worst, 0.0))
