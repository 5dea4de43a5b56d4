"""Cross-validated choice of the penalty and of the subspace dimension."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .classify import KnnClassifier, misclassification_risk
from .dataio import Dataset, kfold_indices
from .errors import NumericalError
from .gradient_field import default_k
from .local_logistic import LocalProblem, SolverOptions, fit_path, lambda_max
from .neighbors import NeighborIndex
from .rng import as_stream
from .subspace import SubspaceModel

log = logging.getLogger(__name__)

LAMBDA_RATIO = 1e-3


@dataclass
class CvReport:
    parameter: str
    grid: list
    risks: list
    fold_risks: list
    chosen: float
    dropped_folds: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "parameter": self.parameter,
            "grid": list(self.grid),
            "risks": list(self.risks),
            "fold_risks": [list(r) for r in self.fold_risks],
            "chosen": self.chosen,
            "dropped_folds": list(self.dropped_folds),
            **self.extra,
        }


def lambda_grid(lam_max: float, grid_size: int = 100, ratio: float = LAMBDA_RATIO) -> np.ndarray:
    """Geometric grid from ``lam_max`` down to ``ratio * lam_max``."""
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    if grid_size == 1:
        return np.array([lam_max])
    return lam_max * ratio ** (np.arange(grid_size) / (grid_size - 1))


def _argmin_first(values) -> int:
    values = np.asarray(values, dtype=float)
    return int(np.flatnonzero(values == values.min())[0])


def select_lambda(dataset: Dataset, k: int | None = None, folds: int = 10,
                  grid_size: int = 100, seed=0, ratio: float = LAMBDA_RATIO,
                  opts: SolverOptions | None = None) -> CvReport:
    """Pick one penalty for every query point by K-fold CV at the covariate mean.

    Each training fold fits the local model on the ``k`` neighbors of the
    mean point along the penalty grid; every held-out row is labeled 1 iff
    ``a + b.(x - xbar) > 0`` (fitted probability above one half). The grid
    starts at ``lambda_max`` of the full-data neighborhood of the mean, and
    ties in CV risk go to the largest penalty.
    """
    X, y = dataset.covariates, dataset.labels
    n = dataset.n
    k = default_k(n) if k is None else k
    xbar = X.mean(axis=0)

    full_nbrs = NeighborIndex(X).query(xbar, min(k, n))
    full_problem = LocalProblem.from_neighbors(X, y, full_nbrs.indices, xbar)
    try:
        lam_max = lambda_max(full_problem)
    except ValueError:
        raise NumericalError("the neighborhood of the mean point contains a single class") from None
    grid = lambda_grid(lam_max, grid_size, ratio)

    parts = kfold_indices(n, folds, as_stream(seed).child(0))
    fold_risks, dropped = [], []
    for j, held in enumerate(parts):
        train = np.setdiff1d(np.arange(n), held, assume_unique=True)
        Xt, yt = X[train], y[train]
        nbrs = NeighborIndex(Xt).query(xbar, min(k, len(train)))
        local_y = yt[nbrs.indices]
        if local_y.min() == local_y.max():
            log.warning("lambda CV: fold %d dropped, single class near the mean point", j)
            dropped.append(j)
            continue
        problem = LocalProblem.from_neighbors(Xt, yt, nbrs.indices, xbar)
        fits = fit_path(problem, grid, opts)
        A = np.array([f.intercept for f in fits])
        B = np.array([f.gradient for f in fits])
        eta = A[None, :] + (X[held] - xbar) @ B.T
        pred = (eta > 0).astype(np.int64)
        fold_risks.append(np.mean(pred != y[held][:, None], axis=0))
    if not fold_risks:
        raise NumericalError("lambda CV: every fold was dropped")
    fold_risks = np.array(fold_risks)
    risks = fold_risks.mean(axis=0)
    best = _argmin_first(risks)
    return CvReport(
        parameter="lambda",
        grid=grid.tolist(),
        risks=risks.tolist(),
        fold_risks=fold_risks.tolist(),
        chosen=float(grid[best]),
        dropped_folds=dropped,
        extra={"k": int(k), "folds": int(folds), "ratio": ratio, "lambda_max": float(lam_max)},
    )


def default_classifier(seed):
    return KnnClassifier(seed=seed)


def select_dimension(dataset: Dataset, basis: SubspaceModel, folds: int = 5,
                     classifier=default_classifier, seed=0) -> CvReport:
    """Choose ``d`` by K-fold CV of a classifier on the top-``d`` projections.

    ``classifier`` is a factory taking a random stream and returning an
    unfitted :class:`~nnlogit.classify.Classifier`. Candidates run over the
    eigenvectors with nonzero eigenvalue; ties go to the smaller ``d``.
    """
    rank = basis.rank
    if rank == 0:
        raise NumericalError("the subspace model has no nonzero eigenvalue")
    X, y = dataset.covariates, dataset.labels
    stream = as_stream(seed)
    parts = kfold_indices(dataset.n, folds, stream.child(0))
    grid = list(range(1, rank + 1))
    all_fold_risks, risks, dropped = [], [], []
    for d in grid:
        Z = basis.project(X, d)
        per_fold = []
        for j, held in enumerate(parts):
            train = np.setdiff1d(np.arange(dataset.n), held, assume_unique=True)
            try:
                clf = classifier(stream.child(1, d, j)).fit(Z[train], y[train])
                pred, _ = clf.predict(Z[held])
            except Exception as exc:  # noqa: BLE001 - any classifier failure drops the fold
                log.warning("dimension CV: d=%d fold %d dropped (%s)", d, j, exc)
                dropped.append([d, j])
                per_fold.append(math.nan)
                continue
            per_fold.append(misclassification_risk(pred, y[held]))
        kept = [r for r in per_fold if not math.isnan(r)]
        if not kept:
            raise NumericalError(f"dimension CV: every fold failed for d={d}")
        all_fold_risks.append(per_fold)
        risks.append(float(np.mean(kept)))
    best = _argmin_first(risks)
    return CvReport(
        parameter="d",
        grid=grid,
        risks=risks,
        fold_risks=[[None if math.isnan(r) else r for r in row] for row in all_fold_risks],
        chosen=grid[best],
        dropped_folds=dropped,
        extra={"folds": int(folds)},
    )
