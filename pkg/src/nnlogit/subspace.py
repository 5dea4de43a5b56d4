"""Outer-product aggregation of gradient estimates and its eigenbasis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

CLAMP_RELATIVE = 1e-12


@dataclass(frozen=True)
class AggregatedMatrix:
    matrix: np.ndarray
    used_points: int
    skipped_points: int = 0


def aggregate_M(estimates) -> AggregatedMatrix:
    """Average of ``b b^T`` over the estimates that were not skipped."""
    grads = [e.gradient for e in estimates if not e.skipped]
    if not grads:
        raise NumericalError("all estimates skipped")
    B = np.asarray(grads, dtype=float)
    M = B.T @ B / B.shape[0]
    M = 0.5 * (M + M.T)
    return AggregatedMatrix(M, B.shape[0], len(estimates) - B.shape[0])


@dataclass
class SubspaceModel:
    eigenvalues: np.ndarray
    basis: np.ndarray
    d: int | None = None

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        """Number of nonzero (post-clamp) eigenvalues."""
        return int(np.count_nonzero(self.eigenvalues > 0))

    def top(self, d: int) -> np.ndarray:
        if not 1 <= d <= self.p:
            raise ValueError(f"d must lie in [1, {self.p}], got {d}")
        return self.basis[:, :d]

    def projector(self, d: int | None = None) -> np.ndarray:
        return projector(self, self.d if d is None else d)

    def project(self, X, d: int | None = None) -> np.ndarray:
        """Coordinates of ``X`` along the top-``d`` eigenvectors.

        ``d == p`` returns ``X`` itself: the full basis only rotates the data,
        and skipping the rotation keeps kNN results bit-identical to the raw
        covariates.
        """
        d = self.d if d is None else d
        if d == self.p:
            return np.asarray(X, dtype=float)
        return np.asarray(X, dtype=float) @ self.top(d)

    def to_json(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "basis": self.basis.T.tolist(),
            "d": self.d,
        }

    @classmethod
    def from_json(cls, doc) -> "SubspaceModel":
        basis = np.array(doc["basis"], dtype=float).T
        return cls(np.array(doc["eigenvalues"], dtype=float), basis, doc.get("d"))


def eigen_basis(M) -> SubspaceModel:
    """Eigenpairs of a symmetric PSD matrix, eigenvalues nonincreasing.

    Each eigenvector is signed so its first nonzero coordinate is positive.
    Eigenvalues below ``1e-12`` times the largest are set to zero.
    """
    M = M.matrix if isinstance(M, AggregatedMatrix) else np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    top = max(vals[0], 0.0)
    vals[vals < CLAMP_RELATIVE * top] = 0.0
    if top == 0.0:
        vals[:] = 0.0
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-14)
        if nz.size and col[nz[0]] < 0:
            vecs[:, j] = -col
    return SubspaceModel(vals, vecs)


def projector(model: SubspaceModel, d: int) -> np.ndarray:
    B = model.top(d)
    return B @ B.T


def _check_orthonormal(B, name):
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[0] < B.shape[1]:
        raise ValueError(f"{name} must be p x d with d <= p")
    dev = np.abs(B.T @ B - np.eye(B.shape[1])).max()
    if dev > 1e-6:
        raise ValueError(f"{name} columns are not orthonormal (Gram deviation {dev:.2e})")
    return B


def subspace_distance(B1, B2) -> float:
    """Frobenius norm of the difference of the orthogonal projectors onto two spans."""
    B1 = _check_orthonormal(B1, "B1")
    B2 = _check_orthonormal(B2, "B2")
    if B1.shape[0] != B2.shape[0]:
        raise ValueError("bases live in different ambient dimensions")
    return float(np.linalg.norm(B1 @ B1.T - B2 @ B2.T, "fro"))
