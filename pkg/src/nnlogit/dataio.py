"""Datasets, CSV ingestion, standardization and train/test splits.

Accepted CSV dialect: comma separator, '.' decimal point, optional header
row. The header is detected by whether the first row's feature cells parse
as numbers.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import RandomStream, as_stream, shuffle

log = logging.getLogger(__name__)

MISSING = {"", "na", "nan", "?", "null", "none"}


@dataclass(frozen=True)
class Dataset:
    covariates: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.covariates, dtype=float))
        y = np.asarray(self.labels).reshape(-1).astype(np.int64)
        if X.shape[0] != y.shape[0]:
            raise DataError("covariates and labels have different lengths")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        if not np.all(np.isfinite(X)):
            raise DataError("covariates contain non-finite values")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise DataError("feature_names length does not match covariates")
        object.__setattr__(self, "covariates", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.covariates[idx], self.labels[idx], self.feature_names)

    def summary(self) -> dict:
        n1 = int(self.labels.sum())
        return {
            "n": self.n,
            "p": self.p,
            "class_counts": {"0": self.n - n1, "1": n1},
            "dropped_rows": self.dropped_rows,
        }


def _parse_float(cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"unparseable cell {cell!r}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite cell {cell!r}")
    return value


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column="y", positive="1", header: bool | None = None,
             drop_columns=()) -> Dataset:
    """Read a labeled CSV file.

    Parameters
    ----------
    path : str or Path
    label_column : str or int
        Header name, or a column position (negative counts from the end).
    positive : str
        Label value mapped to class 1. The other value maps to 0; a third
        distinct value is an error.
    header : bool, optional
        Force header handling; autodetected when ``None``.
    drop_columns : iterable of str or int
        Columns to ignore (ids and the like).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")

    first = [c.strip() for c in rows[0]]
    label_column = _as_column(label_column)
    drop_columns = [_as_column(c) for c in drop_columns]
    by_name = isinstance(label_column, str)
    if header is None:
        if by_name:
            header = label_column in first
        else:
            pos = _position(label_column, first)
            header = not all(_is_number(c) or c.lower() in MISSING
                             for j, c in enumerate(first) if j != pos)
    if by_name and not header:
        raise DataError(f"label column {label_column!r} given by name but the file has no header")
    names = first if header else [f"x{j + 1}" for j in range(len(first))]
    body = rows[1:] if header else rows

    label_pos = _position(label_column, names)
    drop = {_position(c, names) for c in drop_columns}
    feat_pos = [j for j in range(len(names)) if j != label_pos and j not in drop]

    positive = str(positive).strip()
    X, y, seen, dropped = [], [], set(), 0
    for lineno, row in enumerate(body, start=2 if header else 1):
        if len(row) != len(names):
            raise DataError(f"line {lineno}: expected {len(names)} fields, got {len(row)}")
        cells = [row[j].strip() for j in feat_pos]
        lab = row[label_pos].strip()
        if lab.lower() in MISSING or any(c.lower() in MISSING for c in cells):
            dropped += 1
            continue
        seen.add(lab)
        if len(seen) > 2:
            raise DataError(f"line {lineno}: more than two label values: {sorted(seen)}")
        X.append([_parse_float(c) for c in cells])
        y.append(1 if lab == positive else 0)
    if len(seen) == 2 and positive not in seen:
        raise DataError(f"positive label {positive!r} not among {sorted(seen)}")
    if not X:
        raise DataError(f"{path}: no usable rows")
    if dropped:
        log.warning("%s: dropped %d row(s) with missing values", path, dropped)
    return Dataset(np.array(X, dtype=float), np.array(y), tuple(names[j] for j in feat_pos), dropped)


def _as_column(column):
    """Digit strings (as they arrive from the command line) are positions."""
    if isinstance(column, str) and column.strip().lstrip("-").isdigit():
        return int(column)
    return column


def _position(column, names) -> int:
    if isinstance(column, int):
        pos = column
        if pos < 0:
            pos += len(names)
        if not 0 <= pos < len(names):
            raise DataError(f"column index {column} out of range")
        return pos
    if column not in names:
        raise DataError(f"column {column!r} not found in header")
    return names.index(column)


def write_csv(dataset: Dataset, path, label_column="y") -> None:
    names = dataset.feature_names or tuple(f"x{j + 1}" for j in range(dataset.p))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, label_column])
        for row, lab in zip(dataset.covariates.tolist(), dataset.labels.tolist()):
            w.writerow([repr(v) for v in row] + [lab])


@dataclass(frozen=True)
class Scaling:
    center: np.ndarray
    scale: np.ndarray
    zero_variance: np.ndarray = field(default=None)

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.center) / self.scale

    def invert(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.scale + self.center

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "scale": self.scale.tolist(),
                "zero_variance": self.zero_variance.tolist()}

    @classmethod
    def from_json(cls, doc) -> "Scaling":
        return cls(np.array(doc["center"], dtype=float), np.array(doc["scale"], dtype=float),
                   np.array(doc["zero_variance"], dtype=bool))


def fit_scaling(X) -> Scaling:
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise DataError("standardization needs at least two rows")
    center = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    zero = ~(sd > 0)
    return Scaling(center, np.where(zero, 1.0, sd), zero)


def standardize(dataset: Dataset, scaling: Scaling | None = None) -> tuple[Dataset, Scaling]:
    """Center and scale columns to unit sample SD; constant columns are only centered."""
    scaling = scaling or fit_scaling(dataset.covariates)
    out = Dataset(scaling.apply(dataset.covariates), dataset.labels, dataset.feature_names,
                  dataset.dropped_rows)
    return out, scaling


def split(dataset: Dataset, train_fraction: float = 0.7, seed=0) -> tuple[Dataset, Dataset]:
    """Uniform random train/test partition with ``round(fraction * n)`` training rows."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    train_idx, test_idx = split_indices(dataset, train_fraction, seed)
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    for name, part in (("train", train), ("test", test)):
        if part.n == 0 or len(np.unique(part.labels)) < 2:
            raise DataError(f"{name} part does not contain both classes")
    return train, test


def split_indices(dataset: Dataset, train_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    n_train = int(math.floor(train_fraction * dataset.n + 0.5))
    perm = shuffle(as_stream(seed), dataset.n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def kfold_indices(n: int, folds: int, stream: RandomStream) -> list[np.ndarray]:
    """Shuffled partition of ``range(n)`` into ``folds`` near-equal parts."""
    if folds < 2:
        raise ValueError("need at least two folds")
    if folds > n:
        raise ValueError(f"cannot make {folds} folds from {n} rows")
    perm = shuffle(stream, n)
    return [np.sort(part) for part in np.array_split(perm, folds)]
