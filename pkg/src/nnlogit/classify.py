"""Majority-vote kNN classifier and classification metrics."""

from __future__ import annotations

from typing import Protocol

import numpy as np
from scipy.stats import rankdata

from .neighbors import NeighborIndex
from .rng import as_stream, uniform

DEFAULT_K_VOTE = 10


class Classifier(Protocol):
    def fit(self, X, y) -> "Classifier": ...

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(labels, scores)``; scores rank the likelihood of class 1."""
        ...


class KnnClassifier:
    """Vote among the ``k_vote`` nearest training points.

    The score is the fraction of class-1 votes. Exact half/half splits are
    decided by a coin drawn from ``seed``, one per query in query order.
    """

    def __init__(self, k_vote: int = DEFAULT_K_VOTE, seed=0):
        if k_vote < 1:
            raise ValueError("k_vote must be at least 1")
        self.k_vote = int(k_vote)
        self.seed = seed
        self._index = None
        self._labels = None

    def fit(self, X, y) -> "KnnClassifier":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] == 0:
            raise ValueError("empty training set")
        y = np.asarray(y).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError("training rows and labels differ in length")
        self._index = NeighborIndex(X)
        self._labels = y.astype(np.int64)
        return self

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        if self._index is None:
            raise ValueError("classifier is not fitted")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        k = min(self.k_vote, self._index.n)
        idx, _ = self._index.query_many(X, k)
        votes = self._labels[idx].sum(axis=1)
        scores = votes / k
        labels = (2 * votes > k).astype(np.int64)
        tie = 2 * votes == k
        if np.any(tie):
            coins = uniform(as_stream(self.seed), X.shape[0]) < 0.5
            labels[tie] = coins[tie].astype(np.int64)
        return labels, scores


def misclassification_risk(predicted, truth) -> float:
    predicted = np.asarray(predicted).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth differ in length")
    if predicted.size == 0:
        raise ValueError("empty input")
    return float(np.mean(predicted != truth))


def roc_auc(scores, truth) -> float:
    """Area under the ROC curve in Mann-Whitney form; tied scores count one half."""
    scores = np.asarray(scores, dtype=float).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if scores.shape != truth.shape:
        raise ValueError("scores and truth differ in length")
    pos = truth == 1
    n1 = int(pos.sum())
    n0 = truth.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))
