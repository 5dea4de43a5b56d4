import math

import numpy as np
import pytest

from nnlogit.dataio import Dataset
from nnlogit.gradient_field import (
    GradientEstimate, default_k, default_m, estimate_at, estimate_field, estimate_from_neighbors,
)
from nnlogit.model_select import select_lambda
from nnlogit.neighbors import NeighborIndex
from nnlogit.rng import RandomStream
from nnlogit.synthetic import simulate


def _data(rng, n=200, p=3):
    X = rng.standard_normal((n, p))
    y = (rng.random(n) < 1 / (1 + np.exp(-2 * X[:, 0]))).astype(int)
    return Dataset(X, y)


def test_defaults():
    assert default_k(1000) == 31 and default_k(4000) == 63
    assert default_m(1000) == 250 and default_m(1001) == 251


def test_class_filter(rng):
    X = rng.standard_normal((20, 2))
    y = np.array([1] * 4 + [0] * 16)
    est = estimate_from_neighbors(Dataset(X, y), np.zeros(2), np.arange(20), 0.0)
    assert est.skipped and "below 5" in est.reason
    est = estimate_from_neighbors(Dataset(X, np.ones(20, int)), np.zeros(2), np.arange(20), 0.0)
    assert est.skipped


def test_skip_is_monotone_in_threshold(rng):
    ds = _data(rng)
    index = NeighborIndex(ds.covariates)
    for x in ds.covariates[:30]:
        was_skipped = False
        for t in range(1, 12):
            s = estimate_at(ds, index, x, 20, 0.0, min_class=t).skipped
            assert s or not was_skipped
            was_skipped = s


def test_plug_in_identity(rng):
    ds = _data(rng)
    est = estimate_at(ds, NeighborIndex(ds.covariates), np.zeros(3), 60, 0.5)
    assert not est.skipped and 0 < est.pi_hat < 1
    pi = est.pi_hat
    np.testing.assert_array_equal(est.grad_pi_hat, pi * (1 - pi) * est.gradient)
    e = GradientEstimate(np.zeros(1), -800.0, np.ones(1))
    assert 0 <= e.pi_hat < 1e-300 or e.pi_hat == 0.0


def test_negative_lambda_rejected(rng):
    ds = _data(rng)
    with pytest.raises(ValueError):
        estimate_at(ds, NeighborIndex(ds.covariates), np.zeros(3), 10, -1.0)
    with pytest.raises(ValueError):
        estimate_field(ds, m=201)


def test_exhaustive_draw_and_determinism(rng):
    ds = _data(rng, n=60)
    field = estimate_field(ds, m=60, k=20, lam=0.0, seed=3)
    centers = sorted(tuple(e.center) for e in field)
    assert centers == sorted(tuple(r) for r in ds.covariates)
    again = estimate_field(ds, m=60, k=20, lam=0.0, seed=3)
    for a, b in zip(field, again):
        assert a.skipped == b.skipped
        np.testing.assert_array_equal(a.gradient, b.gradient)


def test_example2_skip_fraction():
    ds, _ = simulate(2, 1000, 8, RandomStream(11))
    lam = select_lambda(ds, default_k(ds.n), seed=11).chosen
    field = estimate_field(ds, m=250, lam=lam, seed=1)
    assert sum(e.skipped for e in field) / len(field) < 0.5


def test_norm_shrinks_with_lambda_under_null(rng):
    X = rng.standard_normal((400, 3))
    y = (rng.random(400) < 0.5).astype(int)
    ds = Dataset(X, y)
    index = NeighborIndex(X)
    norms = []
    for lam in (0.0, 0.5, 1.0, 2.0, 4.0, 1e6):
        field = estimate_field(ds, m=40, k=80, lam=lam, seed=0, index=index)
        norms.append(np.mean([np.linalg.norm(e.gradient) for e in field if not e.skipped]))
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
    assert norms[-1] == 0.0


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="at k=isqrt(4000)=63 in p=8 the local estimate is noise dominated; "
                   "measured mean cosine is about 0.25 with CV lambda and 0.39 at lambda=0")
def test_example1_gradient_direction_at_origin():
    cosines = []
    for rep in range(50):
        ds, _ = simulate(1, 4000, 8, RandomStream(500, (rep,)))
        k = default_k(ds.n)
        lam = select_lambda(ds, k, seed=rep).chosen
        est = estimate_at(ds, NeighborIndex(ds.covariates), np.zeros(8), k, lam)
        if est.skipped or not np.any(est.gradient):
            cosines.append(0.0)
            continue
        cosines.append(est.gradient[0] / np.linalg.norm(est.gradient))
    assert np.mean(cosines) > 0.9, np.mean(cosines)
