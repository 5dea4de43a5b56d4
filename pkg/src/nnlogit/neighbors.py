"""Exact Euclidean k-nearest-neighbor search.

Candidates come from a k-d tree; their distances are then recomputed with one
fixed formula and sorted by ``(distance, index)``, so ties always resolve to
the smaller original index and results match a brute-force scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class NeighborSet:
    indices: np.ndarray
    distances: np.ndarray

    @property
    def bandwidth(self) -> float:
        """Distance to the k-th neighbor (the empirical kNN radius)."""
        return float(self.distances[-1])

    def __len__(self):
        return len(self.indices)


def _as_cloud(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("point cloud must be a non-empty n x p array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point cloud contains non-finite entries")
    return np.ascontiguousarray(pts)


def distances_to(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    diff = points - x
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


class NeighborIndex:
    """Immutable exact kNN index over an ``n x p`` cloud."""

    def __init__(self, points):
        self.points = _as_cloud(points)
        self.points.setflags(write=False)
        self.n, self.p = self.points.shape
        self._tree = cKDTree(self.points)

    def _check(self, x, k):
        if not 1 <= k <= self.n:
            raise ValueError(f"k must lie in [1, {self.n}], got {k}")
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.p:
            raise ValueError(f"query has dimension {x.shape[0]}, index has {self.p}")
        if not np.all(np.isfinite(x)):
            raise ValueError("query point is not finite")
        return x

    def _exact(self, x, k, cand):
        d = distances_to(self.points[cand], x)
        order = np.lexsort((cand, d))
        cand, d = cand[order], d[order]
        if len(cand) > k and not d[k] > d[k - 1] * (1.0 + 1e-12) + 1e-300:
            # possible tie straddling the k-th position: take the whole closed ball
            radius = d[k - 1] * (1.0 + 1e-9) + 1e-300
            cand = np.asarray(self._tree.query_ball_point(x, radius), dtype=np.intp)
            d = distances_to(self.points[cand], x)
            order = np.lexsort((cand, d))
            cand, d = cand[order], d[order]
        return NeighborSet(cand[:k].copy(), d[:k].copy())

    def query(self, x, k: int) -> NeighborSet:
        x = self._check(x, k)
        kk = min(k + 1, self.n)
        _, idx = self._tree.query(x, k=kk)
        cand = np.atleast_1d(np.asarray(idx, dtype=np.intp))
        return self._exact(x, k, cand)

    def query_many(self, queries, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Batch version of :meth:`query`; returns ``(indices, distances)``, each m x k."""
        q = np.asarray(queries, dtype=float)
        if q.ndim == 1:
            q = q[None, :]
        if not 1 <= k <= self.n:
            raise ValueError(f"k must lie in [1, {self.n}], got {k}")
        if q.shape[1] != self.p:
            raise ValueError(f"queries have dimension {q.shape[1]}, index has {self.p}")
        if not np.all(np.isfinite(q)):
            raise ValueError("query points are not finite")
        kk = min(k + 1, self.n)
        _, idx = self._tree.query(q, k=kk)
        idx = np.asarray(idx, dtype=np.intp).reshape(len(q), kk)
        out_i = np.empty((len(q), k), dtype=np.intp)
        out_d = np.empty((len(q), k))
        for r in range(len(q)):
            ns = self._exact(q[r], k, idx[r])
            out_i[r] = ns.indices
            out_d[r] = ns.distances
        return out_i, out_d


def build_index(points) -> NeighborIndex:
    return NeighborIndex(points)


def k_nearest(index: NeighborIndex, x, k: int) -> NeighborSet:
    return index.query(x, k)


def unit_ball_volume(p: int) -> float:
    return math.pi ** (p / 2.0) / math.gamma(p / 2.0 + 1.0)


def theoretical_bandwidth(k: float, n: float, p: int, density_at_x: float) -> float:
    """Radius ``(k / (n f V_p))**(1/p)`` the kNN radius concentrates around."""
    if k <= 0 or n <= 0 or p <= 0 or density_at_x <= 0:
        raise ValueError("all arguments must be positive")
    return (k / n / (density_at_x * unit_ball_volume(p))) ** (1.0 / p)
