"""Tests for hard thresholding, CoSaMP, and the sparse recovery solvers."""

import itertools

import numpy as np
import pytest

from phaseforge import (
    ScalarField,
    SolverConfig,
    Termination,
    altmin_sparse,
    copram,
    cosamp,
    forward_phaseless,
    hard_threshold,
    phase_invariant_dist,
    sample_ensemble,
    thresh_wf,
)
from phaseforge.sparse import SparseEstimate


def _sparse_instance(n, s, m, seed, values="flat"):
    rng = np.random.Generator(np.random.Philox(key=seed))
    support = np.sort(rng.choice(n, size=s, replace=False))
    x = np.zeros(n)
    if values == "flat":
        x[support] = rng.choice([-1.0, 1.0], size=s) / np.sqrt(s)
    else:
        x[support] = rng.standard_normal(s)
    A = sample_ensemble(n, m, ScalarField.REAL, seed, 0)
    return x, support, A, forward_phaseless(A, x)


def test_hard_threshold_examples():
    est = hard_threshold(np.array([3.0, -5.0, 1.0]), 2)
    assert np.array_equal(est.values, [3.0, -5.0, 0.0])
    assert np.array_equal(est.support, [0, 1])
    # magnitude tie broken toward the lowest index
    est = hard_threshold(np.array([2.0, -2.0, 0.0]), 1)
    assert np.array_equal(est.values, [2.0, 0.0, 0.0])
    assert np.array_equal(est.support, [0])


def test_hard_threshold_validation():
    with pytest.raises(ValueError):
        hard_threshold(np.ones(3), 0)
    with pytest.raises(ValueError):
        hard_threshold(np.ones(3), 4)


def test_hard_threshold_idempotent():
    rng = np.random.Generator(np.random.Philox(key=0))
    x = rng.standard_normal(10)
    once = hard_threshold(x, 4)
    twice = hard_threshold(once.values, 4)
    assert np.array_equal(once.values, twice.values)
    assert np.array_equal(once.support, twice.support)


def test_hard_threshold_is_euclidean_projection():
    # Oracle: enumerate every support of size s and take the closest
    # restriction of x.
    rng = np.random.Generator(np.random.Philox(key=1))
    n, s = 8, 3
    for _ in range(10):
        x = rng.standard_normal(n)
        est = hard_threshold(x, s)
        best = np.inf
        for sup in itertools.combinations(range(n), s):
            cand = np.zeros(n)
            cand[list(sup)] = x[list(sup)]
            best = min(best, np.linalg.norm(x - cand))
        assert np.isclose(np.linalg.norm(x - est.values), best)


def test_sparse_estimate_rejects_mass_off_support():
    with pytest.raises(ValueError):
        SparseEstimate(values=np.array([1.0, 2.0, 0.0]),
                       support=np.array([0]))


def test_cosamp_matches_best_subset_oracle():
    # Oracle: least squares over every support of size s, smallest residual
    # wins.  Noiseless s-sparse data makes the oracle answer exact.
    rng = np.random.Generator(np.random.Philox(key=2))
    n, s, m = 12, 2, 30
    for trial in range(10):
        M = rng.standard_normal((m, n))
        sup = np.sort(rng.choice(n, size=s, replace=False))
        x = np.zeros(n)
        x[sup] = rng.standard_normal(s) + np.sign(rng.standard_normal(s))
        b = M @ x
        est, degenerate = cosamp(M, b, s)
        best_res, best_x = np.inf, None
        for cand in itertools.combinations(range(n), s):
            cols = list(cand)
            coef, *_ = np.linalg.lstsq(M[:, cols], b, rcond=None)
            res = np.linalg.norm(b - M[:, cols] @ coef)
            if res < best_res:
                best_res = res
                best_x = np.zeros(n)
                best_x[cols] = coef
        assert not degenerate
        assert np.allclose(est.values, best_x, atol=1e-8)


def test_cosamp_zero_rhs():
    M = np.eye(5)
    est, degenerate = cosamp(M, np.zeros(5), 2)
    assert not degenerate
    assert np.all(est.values == 0)


def test_cosamp_shape_mismatch():
    with pytest.raises(ValueError):
        cosamp(np.eye(4), np.zeros(5), 1)


def test_altmin_sparse_recovery_at_generous_m():
    n, s = 200, 5
    ok = 0
    for seed in range(20):
        x, sup, A, y = _sparse_instance(n, s, 1500, seed)
        rep = altmin_sparse(y, A, s, truth=x)
        ok += rep.trace[-1] <= 1e-6
    assert ok >= 18


@pytest.mark.xfail(
    reason="one-shot support selection from m = 0.75 n measurements: the "
    "diagonal statistic's max-of-(n-s) null fluctuation exceeds the "
    "2 x_j^2 signal gap at this scale, so the fixed support is wrong "
    "in essentially every trial",
    strict=True,
)
def test_altmin_sparse_recovery_at_small_m():
    n, s = 200, 5
    ok = 0
    for seed in range(20):
        x, sup, A, y = _sparse_instance(n, s, 150, seed)
        rep = altmin_sparse(y, A, s, truth=x)
        ok += rep.trace[-1] <= 1e-6
    assert ok >= 18


def test_altmin_sparse_fails_on_vanishing_nonzero():
    # One entry 1e-4 of the others: the support statistic cannot see it, the
    # support is fixed wrong, and the error stalls at roughly |x_min|-level.
    n, s, m = 100, 3, 2000
    rng = np.random.Generator(np.random.Philox(key=3))
    x = np.zeros(n)
    x[[4, 40, 70]] = [1.0, -1.0, 1e-4]
    A = sample_ensemble(n, m, ScalarField.REAL, 3, 0)
    y = forward_phaseless(A, x)
    rep = altmin_sparse(y, A, s, truth=x)
    assert 70 not in np.flatnonzero(rep.estimate)


def test_altmin_sparse_full_support_matches_dense_solver():
    from phaseforge import altmin_phase
    from phaseforge.bench import spectral_start

    n, m = 24, 240
    rng = np.random.Generator(np.random.Philox(key=4))
    x = rng.standard_normal(n)
    A = sample_ensemble(n, m, ScalarField.REAL, 4, 0)
    y = forward_phaseless(A, x)
    rep_s = altmin_sparse(y, A, n, truth=x)
    rep_d = altmin_phase(y, A, spectral_start(A, y),
                         SolverConfig(max_iters=100), truth=x)
    assert rep_s.trace[-1] <= 1e-6
    assert rep_d.trace[-1] <= 1e-6
    assert phase_invariant_dist(rep_s.estimate, rep_d.estimate) <= 1e-5


def test_thresh_wf_recovery_moderate_instance():
    n, s, m = 100, 4, 120
    ok = 0
    for seed in range(10):
        x, sup, A, y = _sparse_instance(n, s, m, seed, values="gauss")
        rep = thresh_wf(y, A, s, truth=x)
        ok += rep.trace[-1] <= 1e-6
    assert ok >= 8


def test_thresh_wf_full_support_intensity_reduces_to_wf():
    from phaseforge import wf
    from phaseforge.spectral import sparse_spectral_init

    n, m = 20, 160
    rng = np.random.Generator(np.random.Philox(key=5))
    x = rng.standard_normal(n)
    A = sample_ensemble(n, m, ScalarField.REAL, 5, 0)
    y = forward_phaseless(A, x)
    cfg = SolverConfig(max_iters=40, step_size=0.05, alpha_lb=0.0,
                       alpha_ub=np.inf, gradient="intensity")
    rep_t = thresh_wf(y, A, n, cfg, truth=x)
    x0, _, _ = sparse_spectral_init(A.entries, y.values, n, cfg.truncation)
    rep_w = wf(y, A, x0, cfg, truth=x)
    assert np.array_equal(rep_t.estimate, rep_w.estimate)
    assert rep_t.trace == rep_w.trace


def test_copram_recovery_moderate_instance():
    n, s, m = 100, 4, 120
    ok = 0
    for seed in range(10):
        x, sup, A, y = _sparse_instance(n, s, m, seed, values="gauss")
        rep = copram(y, A, s, truth=x)
        ok += rep.trace[-1] <= 1e-6
    assert ok >= 8


def test_sign_flip_covariance_traces():
    n, s, m = 60, 3, 90
    x, sup, A, y_pos = _sparse_instance(n, s, m, seed=6, values="gauss")
    y_neg = forward_phaseless(A, -x)
    assert np.allclose(y_pos.values, y_neg.values)
    for solver in (thresh_wf, copram, altmin_sparse):
        r1 = solver(y_pos, A, s, truth=x)
        r2 = solver(y_neg, A, s, truth=-x)
        assert np.allclose(r1.trace, r2.trace, atol=1e-10)


def test_degenerate_observation_reports():
    n, s, m = 10, 2, 30
    A = sample_ensemble(n, m, ScalarField.REAL, 7, 0)
    y = forward_phaseless(A, np.zeros(n))
    for solver in (thresh_wf, copram, altmin_sparse):
        rep = solver(y, A, s)
        assert rep.termination is Termination.DEGENERATE
