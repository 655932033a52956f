import json
import math

import numpy as np
import pytest

from conftest import random_feasible_alpha
from distcocoa.data import Dataset, gen_orthogonal_blocks, gen_synthetic, partition_uniform
from distcocoa.exceptions import ConfigError
from distcocoa.local_solvers import exact_block_solver
from distcocoa.objectives import LossModel, dual_value, primal_from_dual
from distcocoa.theory import (SIGMA_DENSE_CAP, local_suboptimality, rate_bound, rate_per_round,
                              sigma_min, theory_report, theta_local_sdca)
from oracles import sampled_rayleigh_max
from workloads import SMOOTH_LAM, SMOOTH_MODEL, smooth_instance


def test_sigma_k1_is_zero():
    ds = gen_synthetic(50, 5, 1.0, 0.0, seed=0)
    assert sigma_min(ds, partition_uniform(50, 1)) == 0.0


def test_sigma_orthogonal_blocks():
    for K in (2, 3, 5):
        ds, part = gen_orthogonal_blocks(K, 12, 4, seed=K)
        assert sigma_min(ds, part) <= 1e-8


def test_sigma_bounds_random_instances():
    rng = np.random.default_rng(0)
    for i in range(100):
        n = int(rng.integers(4, 60))
        d = int(rng.integers(1, 12))
        ds = gen_synthetic(n, d, float(rng.uniform(0.2, 1.0)), 0.1, seed=i)
        part = partition_uniform(n, int(rng.integers(1, min(n, 6) + 1)), seed=i)
        s = sigma_min(ds, part)
        assert 0.0 <= s <= part.n_tilde + 1e-8


def test_sigma_dominates_sampled_quotients():
    for seed in range(3):
        ds = gen_synthetic(40, 6, 1.0, 0.0, seed=seed)
        part = partition_uniform(40, 4, seed=seed)
        s = sigma_min(ds, part)
        samp = sampled_rayleigh_max(ds, part, 100_000, seed)
        assert samp <= s + 1e-6
        assert samp > 0.3 * s  # the sampler is not vacuous


def test_sigma_cap():
    ds = Dataset(np.ones((SIGMA_DENSE_CAP + 1, 1)), np.ones(SIGMA_DENSE_CAP + 1))
    with pytest.raises(ConfigError, match="n_tilde"):
        sigma_min(ds, partition_uniform(ds.n, 2))


def test_theta_examples():
    assert theta_local_sdca(1.0, 10, 1.0, 10, 10) == pytest.approx((10 / 11) ** 10, abs=1e-12)
    assert theta_local_sdca(1.0, 10, 1.0, 10, 10) == pytest.approx(0.38554, abs=1e-5)
    vals = [theta_local_sdca(0.1, 200, 1.0, 50, H) for H in range(1, 200)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 0.03
    assert theta_local_sdca(1e12, 100, 1.0, 7, 1) == pytest.approx(1 - 1 / 7, abs=1e-9)
    assert 0 <= theta_local_sdca(0.01, 100, 4.0, 25, 3) < 1
    with pytest.raises(ConfigError, match="smooth loss"):
        theta_local_sdca(0.1, 10, 0.0, 10, 1)
    with pytest.raises(ConfigError):
        theta_local_sdca(0.1, 10, 1.0, 10, 0)


def test_rate_bound_examples():
    assert rate_bound(7, 4, 1.0, 0.1, 200, 1.0, 3.0, d0_gap=0.8) == 0.8
    th = theta_local_sdca(0.1, 50, 1.0, 50, 5)
    assert rate_bound(6, 1, th, 0.1, 50, 1.0, 0.0, 0.5) == pytest.approx(th ** 6 * 0.5, rel=1e-12)
    r = rate_per_round(4, 0.5, 0.1, 200, 1.0, 2.0)
    assert 0 < r < 1


def test_rate_bound_monotonicity_grid():
    for T in range(1, 6):
        for sig in (0.0, 0.5, 3.0):
            for th in (0.0, 0.3, 0.9):
                b = rate_bound(T, 4, th, 0.01, 100, 1.0, sig)
                assert rate_bound(T + 1, 4, th, 0.01, 100, 1.0, sig) < b
                assert rate_bound(T, 4, th, 0.01, 100, 1.0, sig + 0.5) > b
                assert rate_bound(T, 4, min(th + 0.05, 0.99), 0.01, 100, 1.0, sig) > b


def test_d0_gap_at_most_one(small_ds):
    for m in (LossModel("hinge"), LossModel("smoothed_hinge"), LossModel("logistic")):
        for lam in (1e-3, 0.1, 1.0):
            upd = exact_block_solver(small_ds, np.arange(small_ds.n), np.zeros(small_ds.n),
                                     np.zeros(small_ds.dim), m, lam, tol=1e-9)
            assert dual_value(upd.delta_alpha, small_ds, lam, m) - 0.0 <= 1.0 + 1e-12


def test_local_suboptimality_basic():
    ds, part, ref = smooth_instance()
    rng = np.random.default_rng(0)
    for _ in range(10):
        alpha = random_feasible_alpha(rng, ds.y)
        for k in range(part.K):
            assert local_suboptimality(ds, part, k, alpha, SMOOTH_MODEL, SMOOTH_LAM) >= -1e-10
    # at the optimum every block is optimal
    for k in range(part.K):
        assert local_suboptimality(ds, part, k, ref.alpha, SMOOTH_MODEL, SMOOTH_LAM) <= 1e-10


def test_sum_of_block_gains_dominates_global_gap():
    ds, part, ref = smooth_instance()
    lam, gamma = SMOOTH_LAM, SMOOTH_MODEL.gamma
    c = lam * ds.n * gamma / (sigma_min(ds, part) + lam * ds.n * gamma)
    rng = np.random.default_rng(1)
    for _ in range(10):
        alpha = random_feasible_alpha(rng, ds.y)
        lhs = sum(local_suboptimality(ds, part, k, alpha, SMOOTH_MODEL, lam) for k in range(part.K))
        rhs = c * (ref.d_star - dual_value(alpha, ds, lam, SMOOTH_MODEL))
        assert lhs >= rhs - 1e-10


def test_theory_report():
    ds, part, ref = smooth_instance()
    rep = theory_report(ds, part, SMOOTH_LAM, SMOOTH_MODEL, 20, 10)
    assert 0 <= rep.sigma_min <= rep.n_tilde + 1e-8
    assert 0 <= rep.theta < 1 and 0 < rep.rate_per_round < 1
    assert rep.rate_per_round == pytest.approx(
        1 - (1 - rep.theta) / rep.K * (rep.lam * rep.n) / (rep.sigma_min + rep.lam * rep.n))
    assert json.loads(rep.to_json())["H"] == 20
    assert rep.bound_at_T == pytest.approx(rep.rate_per_round ** 10)
