"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Set ``NNLOGIT_WORKERS`` to run benchmark replications in a process pool.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, experiments
from .dataio import Dataset, Scaling, load_csv, split, write_csv
from .errors import DataError, NumericalError
from .model_select import select_dimension
from .pipeline import evaluate, reduce
from .subspace import SubspaceModel
from .synthetic import SyntheticSpec, generate

SCHEMA_VERSION = experiments.SCHEMA_VERSION
log = logging.getLogger("nnlogit")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dump_json(doc) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(doc, out):
    text = dump_json(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _load(args, path) -> Dataset:
    return load_csv(path, label_column=args.label_column, positive=args.positive,
                    drop_columns=args.drop_columns or ())


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _lambda(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("lambda must be 'auto' or a nonnegative number")
    if not value >= 0:
        raise argparse.ArgumentTypeError("lambda must be nonnegative")
    return value


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".oracle.json")


def cmd_simulate(args):
    spec = SyntheticSpec(args.example, args.n, args.p, args.seed)
    data, oracle = generate(spec)
    write_csv(data, args.out)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "oracle", "example": args.example,
           "n": args.n, "p": args.p, "seed": args.seed, **oracle.to_json()}
    sidecar_path(args.out).write_text(dump_json(doc))


def model_document(red, data, args) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "subspace_model",
        "n": data.n,
        "p": data.p,
        "k": red.k,
        "m": red.m,
        "lambda": red.lam,
        "lambda_mode": "auto" if red.lambda_report is not None else "fixed",
        "lambda_selection": red.lambda_report.to_json() if red.lambda_report else None,
        "used_points": red.matrix.used_points,
        "skipped_points": red.matrix.skipped_points,
        "skip_reasons": red.skip_reasons,
        "scaling": red.scaling.to_json() if red.scaling is not None else None,
        "seed": args.seed,
        "feature_names": list(data.feature_names) if data.feature_names else None,
        **red.model.to_json(),
    }


def load_model(path) -> tuple[SubspaceModel, Scaling | None, dict]:
    doc = _read_json(path)
    if doc.get("kind") != "subspace_model":
        raise DataError(f"{path} is not a subspace model document")
    scaling = Scaling.from_json(doc["scaling"]) if doc.get("scaling") else None
    return SubspaceModel.from_json(doc), scaling, doc


def cmd_reduce(args):
    started = time.perf_counter()
    data = _load(args, args.data)
    red = reduce(data, k=args.k, m=args.m, lam=args.lam, seed=args.seed,
                 lambda_folds=args.lambda_folds, grid_size=args.grid_size,
                 standardize_covariates=args.standardize)
    doc = model_document(red, data, args)
    doc["timing"] = {"wall_time_s": time.perf_counter() - started}
    _emit(doc, args.out)


def _scaled(data, scaling):
    if scaling is None:
        return data
    return Dataset(scaling.apply(data.covariates), data.labels, data.feature_names)


def cmd_select_dim(args):
    data = _load(args, args.data)
    model, scaling, doc = load_model(args.model)
    if model.p != data.p:
        raise DataError(f"model has p={model.p}, data has p={data.p}")
    from .classify import KnnClassifier

    report = select_dimension(_scaled(data, scaling), model, folds=args.folds,
                              classifier=lambda s: KnnClassifier(args.k_vote, s), seed=args.seed)
    out = {"schema_version": SCHEMA_VERSION, "kind": "cv_report", "seed": args.seed,
           "k_vote": args.k_vote, **report.to_json()}
    if args.update_model:
        doc["d"] = int(report.chosen)
        Path(args.model).write_text(dump_json(doc))
    _emit(out, args.out)


def cmd_evaluate(args):
    train = _load(args, args.train)
    test = _load(args, args.test)
    model, scaling, doc = load_model(args.model)
    d = args.d if args.d is not None else doc.get("d")
    if d is None:
        raise DataError("no dimension given and the model has none (run select-dim --update-model)")
    for part in (train, test):
        if part.p != model.p:
            raise DataError(f"model has p={model.p}, data has p={part.p}")
    started = time.perf_counter()
    metrics = evaluate(model, train, test, int(d), args.k_vote, args.seed, scaling)
    _emit({"schema_version": SCHEMA_VERSION, "kind": "evaluation", "seed": args.seed, **metrics,
           "timing": {"wall_time_s": time.perf_counter() - started}}, args.out)


def cmd_split(args):
    data = _load(args, args.data)
    train, test = split(data, args.fraction, args.seed)
    write_csv(train, args.train_out)
    write_csv(test, args.test_out)


def cmd_summary(args):
    data = _load(args, args.data)
    _emit({"schema_version": SCHEMA_VERSION, "kind": "dataset_summary", **data.summary()}, args.out)


def _write_tidy(rows, path):
    keys = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})


def cmd_bench_figures(args):
    report = experiments.bench_figures(args.example, args.n_grid, args.p, args.reps, args.seed,
                                       args.n_test, args.folds, args.k_vote)
    if args.csv:
        _write_tidy(experiments.figures_tidy_rows(report), args.csv)
    _emit(report, args.out)


def cmd_bench_rate(args):
    report = experiments.bench_rate(args.p, args.n_grid, args.reps, args.seed, args.lam)
    if args.csv:
        _write_tidy(report["points"], args.csv)
    _emit(report, args.out)


def _data_options(parser):
    parser.add_argument("--label-column", default="y",
                        help="label column name or position (default: y)")
    parser.add_argument("--positive", default="1", help="label value mapped to class 1")
    parser.add_argument("--drop-columns", nargs="*", default=None,
                        help="columns to ignore (names or positions)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nnlogit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated dataset and its oracle sidecar")
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reduce", help="estimate the subspace model from a CSV")
    p.add_argument("--data", required=True)
    _data_options(p)
    p.add_argument("--k", type=int, default=None, help="neighbors per local fit (default floor(sqrt n))")
    p.add_argument("--m", type=int, default=None, help="query points (default ceil(n/4))")
    p.add_argument("--lambda", dest="lam", type=_lambda, default="auto")
    p.add_argument("--lambda-folds", type=int, default=10)
    p.add_argument("--grid-size", type=int, default=100)
    p.add_argument("--standardize", action="store_true",
                   help="standardize covariates first; the scaling is stored in the model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("select-dim", help="choose the subspace dimension by K-fold CV")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    _data_options(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--k-vote", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--update-model", action="store_true", help="store the chosen d in the model file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_select_dim)

    p = sub.add_parser("evaluate", help="kNN misclassification and AUC on a test CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--model", required=True)
    _data_options(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k-vote", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", help="random train/test split of a CSV")
    p.add_argument("--data", required=True)
    _data_options(p)
    p.add_argument("--fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("summary", help="dataset summary as JSON")
    p.add_argument("--data", required=True)
    _data_options(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("bench-figures", help="replicated distance/risk study on a simulated design")
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4), default=1)
    p.add_argument("--n-grid", type=_ints, default=[500, 1000, 2000])
    p.add_argument("--p", type=int, default=8)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-test", type=int, default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--k-vote", type=int, default=10)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None, help="also write per-replication tidy CSV")
    p.set_defaults(func=cmd_bench_figures)

    p = sub.add_parser("bench-rate", help="empirical convergence rate of the gradient estimate")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--n-grid", type=_ints, default=[500, 1000, 2000, 4000])
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_bench_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
