import json
import subprocess
import sys

import numpy as np
import pytest

from nnlogit.cli import main
from nnlogit.dataio import load_csv


def run(*args):
    return main([str(a) for a in args])


def strip_timing(doc):
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if "timing" not in k}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


def test_simulate(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("simulate", "--example", 1, "--n", 100, "--out", a, "--seed", 4) == 0
    assert run("simulate", "--example", 1, "--n", 100, "--out", b, "--seed", 4) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = a.read_text().strip().splitlines()
    assert len(rows) == 101 and len(rows[0].split(",")) == 9
    run("simulate", "--example", 4, "--n", 30, "--out", tmp_path / "e4.csv")
    assert json.loads((tmp_path / "e4.oracle.json").read_text())["true_d"] == 3


def test_pipeline_commands(tmp_path):
    data = tmp_path / "d.csv"
    run("simulate", "--example", 1, "--n", 600, "--seed", 1, "--out", data)
    assert run("split", "--data", data, "--train-out", tmp_path / "tr.csv",
               "--test-out", tmp_path / "te.csv", "--seed", 2) == 0
    model = tmp_path / "m.json"
    assert run("reduce", "--data", tmp_path / "tr.csv", "--out", model, "--seed", 3) == 0
    doc = json.loads(model.read_text())
    assert doc["schema_version"] == 1 and len(doc["eigenvalues"]) == 8
    assert run("select-dim", "--data", tmp_path / "tr.csv", "--model", model,
               "--out", tmp_path / "cv.json", "--update-model") == 0
    chosen = json.loads((tmp_path / "cv.json").read_text())["chosen"]
    assert json.loads(model.read_text())["d"] == chosen
    assert run("evaluate", "--train", tmp_path / "tr.csv", "--test", tmp_path / "te.csv",
               "--model", model, "--d", 8, "--out", tmp_path / "ev.json") == 0
    ev = json.loads((tmp_path / "ev.json").read_text())
    assert {k: ev[k] for k in ("misclassification", "auc")} == ev["full"]
    assert run("summary", "--data", data, "--out", tmp_path / "s.json") == 0
    assert json.loads((tmp_path / "s.json").read_text())["n"] == 600


def test_model_round_trip(tmp_path):
    from nnlogit.cli import load_model

    data = tmp_path / "d.csv"
    run("simulate", "--example", 2, "--n", 400, "--out", data)
    model = tmp_path / "m.json"
    run("reduce", "--data", data, "--out", model)
    m, _, _ = load_model(model)
    doc = json.loads(model.read_text())
    np.testing.assert_array_equal(m.basis, np.array(doc["basis"]).T)
    np.testing.assert_array_equal(m.eigenvalues, doc["eigenvalues"])


def test_exit_codes(tmp_path):
    data = tmp_path / "d.csv"
    run("simulate", "--example", 1, "--n", 300, "--out", data)
    assert run("reduce", "--data", data, "--lambda", "1e6") == 4
    assert run("summary", "--data", tmp_path / "missing.csv") == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\nfoo,1\n")
    assert run("summary", "--data", bad) == 3
    assert run("reduce", "--data", data, "--m", 10_000) == 2
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--example", 9, "--n", 5, "--out", data)
    assert exc.value.code == 2
    proc = subprocess.run([sys.executable, "-m", "nnlogit.cli", "bogus"], capture_output=True)
    assert proc.returncode == 2


def test_bench_rate_shape(tmp_path):
    out = tmp_path / "r.json"
    assert run("bench-rate", "--n-grid", "200,400", "--reps", 1, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert len(doc["points"]) == 2 and isinstance(doc["slope"], float)


def test_bench_figures_small(tmp_path):
    out, tidy = tmp_path / "f.json", tmp_path / "f.csv"
    assert run("bench-figures", "--n-grid", "300", "--reps", 2, "--out", out, "--csv", tidy) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1 and "timing" in json.dumps(doc)
    assert len(tidy.read_text().splitlines()) > 1


@pytest.mark.slow
def test_reduce_recovers_example1_direction(tmp_path):
    hits = 0
    for seed in range(20):
        data = tmp_path / f"d{seed}.csv"
        run("simulate", "--example", 1, "--n", 2000, "--seed", seed, "--out", data)
        run("reduce", "--data", data, "--seed", seed, "--out", tmp_path / "m.json")
        basis = np.array(json.loads((tmp_path / "m.json").read_text())["basis"])
        hits += abs(basis[0][0]) > 0.9
    assert hits >= 16
