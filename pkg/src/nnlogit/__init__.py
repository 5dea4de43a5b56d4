"""Nearest-neighbor L1-penalized local logistic regression for gradient-based
dimension reduction in binary classification."""

__version__ = "0.1.0"

from .classify import KnnClassifier, misclassification_risk, roc_auc
from .dataio import Dataset, load_csv, split, standardize
from .gradient_field import GradientEstimate, estimate_at, estimate_field
from .local_logistic import LocalFit, LocalProblem, SolverOptions, fit_penalized, lambda_max
from .model_select import CvReport, select_dimension, select_lambda
from .neighbors import NeighborIndex, build_index, k_nearest
from .pipeline import evaluate, reduce
from .subspace import SubspaceModel, aggregate_M, eigen_basis, projector, subspace_distance

__all__ = [
    "CvReport", "Dataset", "GradientEstimate", "KnnClassifier", "LocalFit", "LocalProblem",
    "NeighborIndex", "SolverOptions", "SubspaceModel", "aggregate_M", "build_index",
    "eigen_basis", "estimate_at", "estimate_field", "evaluate", "fit_penalized", "k_nearest",
    "lambda_max", "load_csv", "misclassification_risk", "projector", "reduce", "roc_auc",
    "select_dimension", "select_lambda", "split", "standardize", "subspace_distance",
]
