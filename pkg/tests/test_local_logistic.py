import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnlogit.local_logistic import (
    LocalProblem, SolverOptions, fit_penalized, kkt_violation, lambda_max, neg_loglik,
    penalized_objective, score, soft_threshold,
)
from oracles import nll_mpmath, projected_gradient_oracle, random_local_problem


def make(rng, k=40, p=5, lam=0.0):
    D, y = random_local_problem(rng, k, p)
    return LocalProblem(rng.standard_normal(p), D, y, lam)


def test_neg_loglik_at_zero(rng):
    pr = make(rng, k=13)
    assert neg_loglik(pr, 0.0, np.zeros(pr.p)) == pytest.approx(13 * math.log(2), rel=1e-15)


def test_neg_loglik_saturates():
    pr = LocalProblem(np.zeros(2), [[0.3, -0.1]], [1])
    assert neg_loglik(pr, 30.0, np.zeros(2)) < 1e-12
    assert math.isfinite(neg_loglik(pr, -800.0, np.zeros(2)))


def test_neg_loglik_matches_extended_precision(rng):
    for _ in range(5):
        D = rng.standard_normal((5, 3))
        y = rng.integers(0, 2, 5)
        a, b = rng.standard_normal(), 3 * rng.standard_normal(3)
        pr = LocalProblem(np.zeros(3), D, y)
        assert neg_loglik(pr, a, b) == pytest.approx(nll_mpmath(D, y, a, b), rel=1e-13)


def test_neg_loglik_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        neg_loglik(make(rng), 0.0, np.zeros(2))


def test_soft_threshold(rng):
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-0.5, 1.0) == 0.0
    z = rng.standard_normal(10)
    np.testing.assert_array_equal(soft_threshold(z, 0.0), z)


def test_score_matches_central_differences(rng):
    for _ in range(10):
        pr = make(rng)
        a, b = rng.standard_normal(), rng.standard_normal(pr.p)
        ga, gb = score(pr, a, b)
        L = lambda a_, b_: -neg_loglik(pr, a_, b_)  # noqa: E731
        h = 1e-5
        fd_a = (L(a + h, b) - L(a - h, b)) / (2 * h)
        fd_b = [(L(a, b + h * e) - L(a, b - h * e)) / (2 * h) for e in np.eye(pr.p)]
        np.testing.assert_allclose([ga, *gb], [fd_a, *fd_b], rtol=1e-6, atol=1e-8)


def test_large_penalty_gives_intercept_only(rng, backend):
    pr = make(rng)
    fit = fit_penalized(pr.with_lambda(1.01 * lambda_max(pr)))
    assert np.all(fit.gradient == 0.0)
    ybar = pr.labels.mean()
    assert fit.intercept == pytest.approx(math.log(ybar / (1 - ybar)), abs=1e-10)


def test_half_lambda_max_is_active(rng, backend):
    pr = make(rng)
    assert np.any(fit_penalized(pr.with_lambda(0.5 * lambda_max(pr))).gradient != 0.0)


def test_lambda_max_degenerate_cases(rng):
    pr = LocalProblem(np.zeros(3), np.zeros((6, 3)), [0, 1, 1, 0, 1, 0])
    assert lambda_max(pr) == 0.0
    with pytest.raises(ValueError):
        lambda_max(LocalProblem(np.zeros(2), [[1.0, 2.0]], [1]))
    with pytest.raises(ValueError):
        lambda_max(LocalProblem(np.zeros(1), [[1.0], [2.0]], [0, 0]))


def test_label_flip_is_exact(rng, backend):
    for lam_frac in (0.0, 0.1, 0.5):
        pr = make(rng)
        lam = lam_frac * lambda_max(pr)
        f = fit_penalized(pr.with_lambda(lam))
        g = fit_penalized(LocalProblem(pr.center, pr.deltas, 1 - pr.labels, lam))
        assert g.intercept == -f.intercept
        np.testing.assert_array_equal(g.gradient, -f.gradient)


def test_matches_projected_gradient_oracle(rng):
    for _ in range(10):
        pr = make(rng, lam=0.3)
        fit = fit_penalized(pr)
        _, _, best = projected_gradient_oracle(pr.deltas, pr.labels, 0.3)
        assert fit.objective >= best - 1e-5
        assert abs(fit.objective - best) <= 1e-5


def test_kkt_certificate_and_monotone_history(rng, backend):
    for _ in range(10):
        pr = make(rng)
        for frac in (0.0, 0.05, 0.3, 0.9):
            p2 = pr.with_lambda(frac * lambda_max(pr))
            fit = fit_penalized(p2)
            assert fit.converged and not fit.degenerate
            assert kkt_violation(p2, fit) <= 1e-5
            assert np.all(np.diff(fit.history) >= -1e-12 * np.abs(fit.history[1:]))
            ybar = p2.labels.mean()
            start = penalized_objective(p2, math.log(ybar / (1 - ybar)), np.zeros(p2.p))
            assert fit.objective >= start - 1e-10


def test_translation_invariance(rng, backend):
    # dyadic coordinates keep X + c and X - x exact
    X = np.round(rng.standard_normal((40, 4)) * 1024) / 1024
    y = (rng.random(40) < 0.5).astype(float)
    y[:2] = [0, 1]
    c = rng.integers(-50, 50, 4).astype(float)
    idx = np.arange(40)
    a = fit_penalized(LocalProblem.from_neighbors(X, y, idx, X[0], 0.2))
    b = fit_penalized(LocalProblem.from_neighbors(X + c, y, idx, X[0] + c, 0.2))
    assert a.intercept == b.intercept
    np.testing.assert_array_equal(a.gradient, b.gradient)


def test_constant_labels_are_degenerate():
    pr = LocalProblem(np.zeros(2), [[0.1, 0.2], [0.3, -0.2], [1.0, 0.0]], [1, 1, 1])
    fit = fit_penalized(pr)
    assert fit.degenerate and fit.intercept > 0 and np.all(fit.gradient == 0)


def test_separable_neighborhood_is_flagged(backend):
    D = np.linspace(-1, 1, 20)[:, None]
    y = (D[:, 0] > 0).astype(float)
    fit = fit_penalized(LocalProblem(np.zeros(1), D, y, 0.0))
    assert fit.degenerate
    assert np.all(np.isfinite(fit.gradient))
    assert np.max(np.abs(fit.intercept + D @ fit.gradient)) <= 30.0 + 1e-9


def test_zero_variance_column_stays_zero(rng, backend):
    D, y = random_local_problem(rng, 30, 3)
    D[:, 1] = 0.7
    fit = fit_penalized(LocalProblem(np.zeros(3), D, y, 0.0))
    assert fit.gradient[1] == 0.0
    assert kkt_violation(LocalProblem(np.zeros(3), D, y, 0.0), fit) <= 1e-5


def test_nonconvergence_is_reported(rng):
    pr = make(rng, lam=0.01)
    fit = fit_penalized(pr, SolverOptions(max_sweeps=2))
    assert not fit.converged
    assert fit.iterations == 2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), lam=st.floats(0.0, 5.0))
def test_concavity_witness(seed, lam):
    r = np.random.default_rng(seed)
    D, y = random_local_problem(r, 15, 3)
    pr = LocalProblem(np.zeros(3), D, y, lam)
    a1, b1, a2, b2 = r.standard_normal(), r.standard_normal(3), r.standard_normal(), r.standard_normal(3)
    mid = penalized_objective(pr, (a1 + a2) / 2, (b1 + b2) / 2)
    ends = (penalized_objective(pr, a1, b1) + penalized_objective(pr, a2, b2)) / 2
    assert mid >= ends - 1e-12 * max(1.0, abs(ends))


def test_invalid_problem():
    with pytest.raises(ValueError):
        LocalProblem(np.zeros(1), [[1.0]], [2])
    with pytest.raises(ValueError):
        LocalProblem(np.zeros(1), [[1.0]], [1], lam=-1.0)
    with pytest.raises(ValueError):
        LocalProblem(np.zeros(2), [[1.0]], [1])
