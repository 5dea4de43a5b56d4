"""End-to-end reduction and evaluation used by the CLI and the harnesses."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .classify import DEFAULT_K_VOTE, KnnClassifier, misclassification_risk, roc_auc
from .dataio import Dataset, Scaling, standardize
from .errors import NumericalError
from .gradient_field import default_k, default_m, estimate_field
from .model_select import CvReport, select_lambda
from .neighbors import NeighborIndex
from .rng import as_stream
from .subspace import AggregatedMatrix, SubspaceModel, aggregate_M, eigen_basis


@dataclass
class Reduction:
    model: SubspaceModel
    matrix: AggregatedMatrix
    lam: float
    k: int
    m: int
    lambda_report: CvReport | None
    skip_reasons: dict
    scaling: Scaling | None = None


def reduce(dataset: Dataset, k: int | None = None, m: int | None = None, lam="auto",
           seed=0, lambda_folds: int = 10, grid_size: int = 100,
           standardize_covariates: bool = False) -> Reduction:
    """Estimate the central-subspace basis from one dataset.

    ``lam="auto"`` selects the penalty by cross-validation at the mean
    point; a number fixes it (``0`` gives the unpenalized estimator).
    """
    scaling = None
    if standardize_covariates:
        dataset, scaling = standardize(dataset)
    k = default_k(dataset.n) if k is None else int(k)
    m = default_m(dataset.n) if m is None else int(m)
    stream = as_stream(seed)
    report = None
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lambda must be a number or 'auto', got {lam!r}")
        report = select_lambda(dataset, k=k, folds=lambda_folds, grid_size=grid_size,
                               seed=stream.child(0))
        lam = report.chosen
    lam = float(lam)
    estimates = estimate_field(dataset, m=m, k=k, lam=lam, seed=stream.child(1),
                               index=NeighborIndex(dataset.covariates))
    reasons = Counter(e.reason for e in estimates if e.skipped)
    try:
        agg = aggregate_M(estimates)
    except NumericalError:
        raise NumericalError("all estimates skipped or zero") from None
    if not np.any(agg.matrix):
        raise NumericalError("all estimates skipped or zero")
    return Reduction(eigen_basis(agg), agg, lam, k, m, report, dict(sorted(reasons.items())), scaling)


def knn_metrics(Z_train, y_train, Z_test, y_test, k_vote=DEFAULT_K_VOTE, seed=0) -> dict:
    clf = KnnClassifier(k_vote, seed).fit(Z_train, y_train)
    pred, scores = clf.predict(Z_test)
    out = {"misclassification": misclassification_risk(pred, y_test)}
    out["auc"] = roc_auc(scores, y_test) if len(np.unique(y_test)) == 2 else None
    return out


def evaluate(model: SubspaceModel, train: Dataset, test: Dataset, d: int,
             k_vote: int = DEFAULT_K_VOTE, seed=0, scaling: Scaling | None = None) -> dict:
    """kNN metrics on the top-``d`` projection plus the unprojected baseline."""
    Xtr, Xte = train.covariates, test.covariates
    if scaling is not None:
        Xtr, Xte = scaling.apply(Xtr), scaling.apply(Xte)
    projected = knn_metrics(model.project(Xtr, d), train.labels, model.project(Xte, d),
                            test.labels, k_vote, seed)
    full = knn_metrics(Xtr, train.labels, Xte, test.labels, k_vote, seed)
    return {"d": int(d), "k_vote": int(k_vote), "n_train": train.n, "n_test": test.n,
            **projected, "full": full}
