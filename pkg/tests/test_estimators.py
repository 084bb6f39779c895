import math

import numpy as np
import pytest

from doublesparse.core import (
    GroupedMatrix,
    NoiseModel,
    SparsityBudget,
    matrix_to_vec,
    stream,
)
from doublesparse import estimators, simulate
from doublesparse.estimators import ThresholdSchedule


def test_default_lambda_inf_reference_value():
    val = estimators.default_lambda_inf(1.0, 100, 128, 16, 2, 2)
    assert val == pytest.approx(1.5045109615, abs=1e-9)


def test_default_lambda_inf_validation():
    with pytest.raises(ValueError):
        estimators.default_lambda_inf(1.0, 0, 10, 5, 1, 1)
    with pytest.raises(ValueError):
        estimators.default_lambda_inf(-1.0, 10, 10, 5, 1, 1)


def test_schedule_geometry():
    sched = ThresholdSchedule(2.0, 0.25, 0.1)
    assert sched.value_at(0) == 2.0
    assert sched.value_at(2) == pytest.approx(0.5)
    # one sqrt(kappa) factor per step
    assert sched.value_at(1) == pytest.approx(2.0 * 0.5)
    with pytest.raises(ValueError):
        ThresholdSchedule(0.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        ThresholdSchedule(1.0, 1.5, 0.1)
    with pytest.raises(ValueError):
        ThresholdSchedule(1.0, 0.5, 0.0)


def test_iteration_count_matches_schedule_length():
    # number of gradient steps is the number of lambda values >= lambda_inf
    lam0, kappa, lam_inf = 1.0, 0.64, 0.3
    expected = 0
    lam = lam0
    while lam >= lam_inf:
        expected += 1
        lam *= math.sqrt(kappa)
    rng = stream(9)
    budget = SparsityBudget.hard(4, 4, 2, 2)
    X = simulate.gen_design(20, 16, "gaussian_iid", rng)
    Y = rng.normal(size=20)
    _, trace = estimators.dsiht(X, Y, budget, ThresholdSchedule(lam0, kappa, lam_inf))
    assert trace.iterations == expected


def test_noise_free_exact_recovery_orthogonal_design():
    rng = stream(10)
    budget = SparsityBudget.hard(6, 6, 2, 2)
    spec = simulate.SignalSpec(budget, simulate.Constant(1.0), sign="random")
    theta = simulate.gen_signal(spec, rng)
    beta = matrix_to_vec(theta)
    X = simulate.gen_design(36, 36, "identity_scaled", rng)
    Y = X @ beta
    sched = ThresholdSchedule(1.0, 0.8, 0.75)
    beta_hat, _ = estimators.dsiht(X, Y, budget, sched, truth=beta)
    assert np.linalg.norm(beta_hat - beta) <= 1e-12


def test_heterogeneous_noise_free_recovery():
    rng = stream(11)
    budget = SparsityBudget.heterogeneous(6, 6, 2, s_prime=3)
    spec = simulate.SignalSpec(budget, simulate.Constant(1.0), sign="random")
    theta = simulate.gen_signal(spec, rng)
    beta = matrix_to_vec(theta)
    X = simulate.gen_design(36, 36, "identity_scaled", rng)
    Y = X @ beta
    # a lone-entry column has squared mass 1; the column condition needs
    # s0 * lam^2 <= 1, so stop the schedule below 1/sqrt(s0)
    # s0*lam^2 <= 1 throughout, and at least two steps so the returned
    # second-to-last iterate is a post-threshold fixed point
    sched = ThresholdSchedule(0.5, 0.8, 0.4)
    beta_hat, _ = estimators.dsiht_heterogeneous(X, Y, budget, sched, truth=beta)
    assert np.linalg.norm(beta_hat - beta) <= 1e-12


def test_returned_estimate_is_second_to_last_iterate():
    rng = stream(12)
    budget = SparsityBudget.hard(4, 4, 1, 1)
    X = simulate.gen_design(16, 16, "identity_scaled", rng)
    beta = np.zeros(16)
    beta[5] = 2.0
    Y = X @ beta
    beta_hat, trace = estimators.dsiht(X, Y, budget, ThresholdSchedule(1.0, 0.5, 0.3))
    assert np.array_equal(beta_hat, trace.betas[-2])


def test_empty_schedule_warns_and_returns_start():
    rng = stream(13)
    budget = SparsityBudget.hard(4, 4, 1, 1)
    X = simulate.gen_design(16, 16, "identity_scaled", rng)
    Y = rng.normal(size=16)
    with pytest.warns(UserWarning):
        beta_hat, trace = estimators.dsiht(
            X, Y, budget, ThresholdSchedule(0.5, 0.5, 1.0)
        )
    assert trace.empty_schedule
    assert np.array_equal(beta_hat, np.zeros(16))


def test_unnormalized_design_rejected():
    budget = SparsityBudget.hard(4, 4, 1, 1)
    X = 2.0 * np.ones((8, 16))
    with pytest.raises(ValueError):
        estimators.dsiht(X, np.zeros(8), budget, ThresholdSchedule(1.0, 0.5, 0.5))


def test_mode_mismatch_rejected():
    rng = stream(14)
    X = simulate.gen_design(16, 16, "identity_scaled", rng)
    Y = np.zeros(16)
    het = SparsityBudget.heterogeneous(4, 4, 2, s_prime=3)
    hard = SparsityBudget.hard(4, 4, 2, 2)
    sched = ThresholdSchedule(1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        estimators.dsiht(X, Y, het, sched)
    with pytest.raises(ValueError):
        estimators.dsiht_heterogeneous(X, Y, hard, sched)


def test_trace_bound_uses_correct_constants():
    assert estimators.HARD_CONTRACTION_CONSTANT == pytest.approx(2 + math.sqrt(3))
    assert estimators.HETEROGENEOUS_CONTRACTION_CONSTANT == pytest.approx(
        2 + math.sqrt(2)
    )


def test_projection_matches_bruteforce_small():
    rng = stream(15)
    for _ in range(200):
        d = int(rng.integers(2, 6))
        m = int(rng.integers(2, 6))
        s = int(rng.integers(1, min(m, 2) + 1))
        s0 = int(rng.integers(1, min(d, 2) + 1))
        Y = GroupedMatrix(rng.normal(size=(d, m)))
        proj = estimators.project_double_sparse(Y, s, s0)
        brute = estimators.constrained_ls_bruteforce(
            Y, SparsityBudget.hard(m, d, s, s0)
        )
        obj_p = np.sum((proj.values - Y.values) ** 2)
        obj_b = np.sum((brute.values - Y.values) ** 2)
        assert abs(obj_p - obj_b) <= 1e-12


def test_projection_keeps_budget():
    rng = stream(16)
    Y = GroupedMatrix(rng.normal(size=(8, 10)))
    out = estimators.project_double_sparse(Y, 3, 2)
    nz_cols = np.count_nonzero(np.any(out.values != 0, axis=0))
    assert nz_cols <= 3
    assert np.all(np.count_nonzero(out.values, axis=0) <= 2)


def test_projection_tie_break_lower_index():
    Y = GroupedMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    out = estimators.project_double_sparse(Y, 1, 1)
    assert out.values[0, 0] == 1.0
    assert np.count_nonzero(out.values) == 1


def test_bruteforce_heterogeneous_beats_hard_projection():
    # signal with 3 entries in one column and 1 in another: the heterogeneous
    # budget (s=2, s_prime=4) captures all mass, hard (s=2, s0=2) cannot
    V = np.zeros((4, 4))
    V[0:3, 0] = 5.0
    V[0, 2] = 5.0
    Y = GroupedMatrix(V)
    het = estimators.constrained_ls_bruteforce(
        Y, SparsityBudget.heterogeneous(4, 4, 2, s_prime=4)
    )
    hard = estimators.constrained_ls_bruteforce(Y, SparsityBudget.hard(4, 4, 2, 2))
    err_het = np.sum((het.values - V) ** 2)
    err_hard = np.sum((hard.values - V) ** 2)
    assert err_het == 0.0
    assert err_hard > 0.0


def test_bruteforce_guard_raises():
    rng = stream(17)
    Y = GroupedMatrix(rng.normal(size=(20, 30)))
    with pytest.raises(ValueError):
        estimators.constrained_ls_bruteforce(Y, SparsityBudget.hard(30, 20, 10, 8))


def test_iht_baseline_recovers_simple_sparse():
    rng = stream(18)
    n, p, k = 100, 30, 3
    X = simulate.gen_design(n, p, "gaussian_iid", rng)
    beta = np.zeros(p)
    beta[[2, 11, 25]] = [1.0, -2.0, 1.5]
    Y = X @ beta
    beta_hat = estimators.iht_baseline(X, Y, k, steps=200)
    assert np.linalg.norm(beta_hat - beta) <= 1e-6


def test_iht_baseline_full_k_is_untruncated_descent():
    rng = stream(19)
    X = simulate.gen_design(20, 5, "gaussian_iid", rng)
    Y = rng.normal(size=20)
    out = estimators.iht_baseline(X, Y, k=5, steps=500)
    lsq = np.linalg.lstsq(X, Y, rcond=None)[0]
    assert np.allclose(out, lsq, atol=1e-8)


def test_default_lambda0_zero_start_dominates_signal():
    rng = stream(20)
    budget = SparsityBudget.hard(5, 5, 2, 2)
    spec = simulate.SignalSpec(budget, simulate.Constant(2.0), sign="random")
    theta = simulate.gen_signal(spec, rng)
    beta = matrix_to_vec(theta)
    X = simulate.gen_design(25, 25, "identity_scaled", rng)
    Y = X @ beta
    lam0 = estimators.default_lambda0(X, Y, 2, 2)
    # ||X^T Y / n|| = ||beta|| = 2*sqrt(s*s0) here, so lam0 equals the magnitude
    assert lam0 == pytest.approx(2.0, rel=1e-12)
