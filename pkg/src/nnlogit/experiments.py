"""Replicated simulation harnesses.

Every replication derives its own random stream from ``(seed, n index, rep)``
so results do not depend on the number of workers or their scheduling.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import NumericalError
from .local_logistic import LocalProblem, fit_penalized
from .model_select import select_dimension
from .neighbors import NeighborIndex
from .pipeline import knn_metrics, reduce
from .rng import RandomStream
from .subspace import subspace_distance
from .synthetic import simulate

SCHEMA_VERSION = 1
WORKERS_ENV = "NNLOGIT_WORKERS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, tasks):
    workers = worker_count()
    if workers == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _summarize(values):
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    if not vals:
        return {"mean": None, "se": None, "count": 0}
    arr = np.asarray(vals, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else None
    return {"mean": float(arr.mean()), "se": se, "count": int(arr.size)}


VARIANTS = {"penalized": "auto", "unpenalized": 0.0}


def _variant_record(train, test, oracle, lam, stream, cv_folds, k_vote):
    try:
        red = reduce(train, lam=lam, seed=stream.child(0))
    except NumericalError as exc:
        return {"failed": True, "reason": str(exc)}
    model = red.model
    true_d = oracle.true_d
    rec = {
        "failed": False,
        "lambda": red.lam,
        "skipped_points": red.matrix.skipped_points,
        "distance": subspace_distance(model.top(true_d), oracle.basis),
        "risk_true_d": knn_metrics(model.project(train.covariates, true_d), train.labels,
                                   model.project(test.covariates, true_d), test.labels,
                                   k_vote, stream.child(1))["misclassification"],
    }
    cv = select_dimension(train, model, folds=cv_folds, seed=stream.child(2))
    d = int(cv.chosen)
    rec["d_cv"] = d
    rec["distance_cv_d"] = subspace_distance(model.top(d), oracle.basis)
    rec["risk_cv_d"] = knn_metrics(model.project(train.covariates, d), train.labels,
                                   model.project(test.covariates, d), test.labels,
                                   k_vote, stream.child(3))["misclassification"]
    return rec


def figures_replication(task):
    example, n, p, n_test, seed, n_pos, rep, cv_folds, k_vote = task
    started = time.perf_counter()
    stream = RandomStream(seed, (n_pos, rep))
    train, oracle = simulate(example, n, p, stream.child(0))
    test, _ = simulate(example, n_test, p, stream.child(1))
    record = {"n": n, "rep": rep}
    for v, (name, lam) in enumerate(VARIANTS.items()):
        record[name] = _variant_record(train, test, oracle, lam, stream.child(2, v), cv_folds, k_vote)
    record["risk_oracle"] = knn_metrics(train.covariates @ oracle.basis, train.labels,
                                        test.covariates @ oracle.basis, test.labels,
                                        k_vote, stream.child(3))["misclassification"]
    record["risk_full"] = knn_metrics(train.covariates, train.labels, test.covariates,
                                      test.labels, k_vote, stream.child(3))["misclassification"]
    record["timing"] = {"wall_time_s": time.perf_counter() - started}
    return record


FIGURE_METRICS = ("distance", "risk_true_d", "d_cv", "distance_cv_d", "risk_cv_d", "lambda")


def aggregate_figures(records, n_grid) -> list[dict]:
    out = []
    for n in n_grid:
        recs = [r for r in records if r["n"] == n]
        row = {"n": n, "reps": len(recs)}
        for name in VARIANTS:
            ok = [r[name] for r in recs if not r[name]["failed"]]
            row[name] = {m: _summarize([r[m] for r in ok]) for m in FIGURE_METRICS}
            row[name]["failures"] = len(recs) - len(ok)
        row["risk_oracle"] = _summarize([r["risk_oracle"] for r in recs])
        row["risk_full"] = _summarize([r["risk_full"] for r in recs])
        out.append(row)
    return out


def bench_figures(example: int = 1, n_grid=(500, 1000, 2000), p: int = 8, reps: int = 50,
                  seed: int = 0, n_test: int | None = None, cv_folds: int = 5,
                  k_vote: int = 10) -> dict:
    """Subspace distance and kNN risk for the penalized and unpenalized estimators.

    Each replication also records the oracle-projection and full-covariate
    kNN risks on an independent test sample (``n_test`` rows, default ``n``).
    """
    n_grid = [int(n) for n in n_grid]
    tasks = [(example, n, p, n_test or n, seed, i, rep, cv_folds, k_vote)
             for i, n in enumerate(n_grid) for rep in range(reps)]
    records = _map(figures_replication, tasks)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bench_figures",
        "config": {"example": example, "n_grid": n_grid, "p": p, "reps": reps, "seed": seed,
                   "n_test": n_test, "cv_folds": cv_folds, "k_vote": k_vote},
        "records": records,
        "aggregates": aggregate_figures(records, n_grid),
    }


def rate_k(n: int, p: int) -> int:
    return int(math.ceil(n ** (4.0 / (p + 4))))


def rate_replication(task):
    """All sample sizes for one replication.

    The sizes share one draw (each sample is a prefix of the largest), which
    keeps the errors at different ``n`` positively correlated and the fitted
    slope far less noisy than with independent samples.
    """
    n_grid, p, lam, seed, rep = task
    data, oracle = simulate(1, max(n_grid), p, RandomStream(seed, (rep,)))
    origin = np.zeros(p)
    truth = oracle.logit_gradient(origin)
    out = []
    for n in n_grid:
        X, y = data.covariates[:n], data.labels[:n]
        k = min(rate_k(n, p), n)
        nbrs = NeighborIndex(X).query(origin, k)
        fit = fit_penalized(LocalProblem.from_neighbors(X, y, nbrs.indices, origin, lam))
        err = None if fit.degenerate else float(np.linalg.norm(fit.gradient - truth))
        out.append({"n": n, "rep": rep, "k": k, "error": err, "degenerate": fit.degenerate})
    return out


def bench_rate(p: int = 1, n_grid=(500, 1000, 2000, 4000), reps: int = 100, seed: int = 0,
               lam: float = 0.0) -> dict:
    """Log-log slope of the gradient error at the origin with ``k = ceil(n^(4/(p+4)))``.

    Uses the logistic design (example 1) with ``p`` covariates; theory
    predicts a slope of ``-1/(p+4)``.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 2:
        raise ValueError("the rate harness needs at least two sample sizes")
    started = time.perf_counter()
    records = [r for batch in _map(rate_replication, [(n_grid, p, lam, seed, rep) for rep in range(reps)])
               for r in batch]
    points = []
    for n in n_grid:
        errs = [r["error"] for r in records if r["n"] == n and r["error"] is not None]
        if not errs:
            raise NumericalError(f"every fit at n={n} was degenerate")
        points.append({"n": n, "k": min(rate_k(n, p), n), "mean_error": float(np.mean(errs)),
                       "se": float(np.std(errs, ddof=1) / math.sqrt(len(errs))) if len(errs) > 1 else None,
                       "used": len(errs)})
    slope, intercept = np.polyfit(np.log([pt["n"] for pt in points]),
                                  np.log([pt["mean_error"] for pt in points]), 1)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bench_rate",
        "config": {"p": p, "n_grid": n_grid, "reps": reps, "seed": seed, "lambda": lam},
        "points": points,
        "slope": float(slope),
        "intercept": float(intercept),
        "theory_slope": -1.0 / (p + 4),
        "records": records,
        "timing": {"wall_time_s": time.perf_counter() - started},
    }


def figures_tidy_rows(report) -> list[dict]:
    rows = []
    for r in report["records"]:
        for name in VARIANTS:
            v = r[name]
            row = {"n": r["n"], "rep": r["rep"], "method": name, "failed": v["failed"]}
            for m in FIGURE_METRICS:
                row[m] = v.get(m)
            rows.append(row)
        for name in ("risk_oracle", "risk_full"):
            rows.append({"n": r["n"], "rep": r["rep"], "method": name.removeprefix("risk_"),
                         "failed": False, "risk_true_d": r[name]})
    return rows
