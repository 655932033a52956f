import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from conftest import LOSS_MODELS, random_feasible_alpha
from distcocoa.data import Dataset, gen_synthetic, partition_uniform
from distcocoa.objectives import (DualState, LossModel, block_primal_image, conj_eval, dual_value,
                                  duality_gap, fenchel_gap, local_dual_value, local_gap,
                                  local_primal_value, loss_eval, primal_from_dual, primal_value)


# independent scalar references, written from the textbook definitions
def ref_loss(family, g, z):
    if family == "hinge":
        return max(0.0, 1.0 - z)
    if family == "smoothed_hinge":
        if z >= 1:
            return 0.0
        if z <= 1 - g:
            return 1 - z - g / 2
        return (1 - z) ** 2 / (2 * g)
    return math.log1p(math.exp(-z)) if z > -30 else -z


def ref_conj_numeric(family, g, alpha, y):
    """sup_a (-a alpha - loss(a)) by bounded scalar maximization."""
    res = minimize_scalar(lambda a: a * alpha + ref_loss(family, g, y * a),
                          bounds=(-60, 60), method="bounded", options={"xatol": 1e-12})
    return -res.fun


def ref_primal(w, X, y, lam, family, g):
    n = X.shape[0]
    tot = 0.0
    for i in range(n):
        m = sum(X[i, j] * w[j] for j in range(X.shape[1]))
        tot += ref_loss(family, g, y[i] * m)
    return lam / 2 * sum(v * v for v in w) + tot / n


def ref_conj(family, g, b):
    if family == "hinge":
        return -b
    if family == "smoothed_hinge":
        return -b + g / 2 * b * b
    ent = 0.0
    for p in (b, 1 - b):
        if p > 0:
            ent += p * math.log(p)
    return ent


def ref_dual(alpha, X, y, lam, family, g):
    n, d = X.shape
    w = [sum(alpha[i] * X[i, j] for i in range(n)) / (lam * n) for j in range(d)]
    return -lam / 2 * sum(v * v for v in w) - sum(ref_conj(family, g, y[i] * alpha[i]) for i in range(n)) / n


TOY = gen_synthetic(5, 3, 1.0, 0.2, seed=11)


def test_loss_and_conj_examples():
    h = LossModel("hinge")
    assert loss_eval(h, 0.0, 1.0) == 1.0
    assert conj_eval(h, 0.0, 1.0) == 0.0
    assert conj_eval(LossModel("smoothed_hinge", 1.0), 1.0, 1.0) == pytest.approx(-0.5)
    lg = LossModel("logistic")
    assert conj_eval(lg, 0.5, 1.0) == pytest.approx(ref_conj_numeric("logistic", 4, 0.5, 1.0), abs=1e-8)


def test_conj_infeasible_is_inf(model):
    assert math.isinf(conj_eval(model, -0.1, 1.0))
    assert math.isinf(conj_eval(model, 1.1, 1.0))
    assert math.isinf(conj_eval(model, 0.3, -1.0))


def test_gamma_values():
    assert LossModel("hinge").gamma == 0
    assert LossModel("smoothed_hinge", 0.5).gamma == 0.5
    assert LossModel("logistic").gamma == 4
    with pytest.raises(ValueError):
        LossModel("squared")


@pytest.mark.parametrize("family,g", [("smoothed_hinge", 1.0), ("smoothed_hinge", 0.3), ("logistic", 4.0)])
@pytest.mark.parametrize("y", [1.0, -1.0])
def test_conjugate_matches_numeric_sup(family, g, y):
    m = LossModel(family, g if family == "smoothed_hinge" else 1.0)
    for b in np.linspace(0.02, 0.98, 25):
        alpha = y * b
        assert conj_eval(m, alpha, y) == pytest.approx(ref_conj_numeric(family, g, alpha, y), abs=1e-8)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(list(LOSS_MODELS)), st.floats(-5, 5), st.floats(0, 1), st.sampled_from([-1.0, 1.0]))
def test_fenchel_young(name, a, b, y):
    m = LOSS_MODELS[name]
    alpha = y * b
    assert loss_eval(m, a, y) + conj_eval(m, alpha, y) >= -a * alpha - 1e-12


@pytest.mark.parametrize("name", ["smoothed_hinge", "logistic"])
def test_smoothness_constant(name):
    m = LOSS_MODELS[name]
    rng = np.random.default_rng(0)
    a, b = rng.uniform(-4, 4, (2, 5000))
    y = rng.choice([-1.0, 1.0], 5000)
    lhs = np.abs(m.derivative(a, y) - m.derivative(b, y))
    assert np.all(lhs <= np.abs(a - b) / m.gamma + 1e-12)


def test_derivative_matches_finite_difference(model):
    a = np.linspace(-3, 3, 61) + 0.013
    for y in (1.0, -1.0):
        fd = (model.loss(a + 1e-6, y) - model.loss(a - 1e-6, y)) / 2e-6
        assert np.allclose(model.derivative(a, y), fd, atol=1e-5)


def test_primal_examples(model):
    ds = gen_synthetic(30, 4, 1.0, 0.3, seed=2)
    p0 = primal_value(np.zeros(4), ds, 0.1, model)
    if model.family == "logistic":
        assert p0 == pytest.approx(math.log(2), abs=1e-15)
    elif model.family == "hinge":
        assert p0 == 1.0


def test_primal_dual_match_reference(model):
    rng = np.random.default_rng(4)
    X = TOY.X.toarray()
    lam = 0.37
    for _ in range(5):
        w = rng.normal(size=3)
        assert primal_value(w, TOY, lam, model) == pytest.approx(
            ref_primal(w, X, TOY.y, lam, model.family, model.gamma), abs=1e-12)
        a = random_feasible_alpha(rng, TOY.y)
        assert dual_value(a, TOY, lam, model) == pytest.approx(
            ref_dual(a, X, TOY.y, lam, model.family, model.gamma), abs=1e-12)


def test_dual_at_zero_and_gap(model):
    ds = gen_synthetic(20, 4, 1.0, 0.0, seed=1)
    assert dual_value(np.zeros(20), ds, 0.5, model) == 0.0
    st0 = DualState.zeros(ds, 0.5)
    if model.family == "hinge":
        assert duality_gap(st0, ds, model) == 1.0
    bad = np.zeros(20)
    bad[0] = -2 * ds.y[0]
    assert dual_value(bad, ds, 0.5, model) == -np.inf


def test_primal_from_dual():
    lam = 0.2
    assert np.all(primal_from_dual(np.zeros(5), TOY, lam) == 0)
    e1 = np.zeros(5)
    e1[0] = 1.0
    assert np.allclose(primal_from_dual(e1, TOY, lam), TOY.X[0].toarray().ravel() / (lam * 5))


def test_incremental_w_matches_recompute():
    ds = gen_synthetic(200, 15, 0.5, 0.1, seed=9)
    lam = 0.01
    rng = np.random.default_rng(1)
    alpha = np.zeros(ds.n)
    w = np.zeros(ds.dim)
    pts = ds.points
    for _ in range(10_000):
        i = rng.integers(ds.n)
        da = rng.normal() * 0.1
        alpha[i] += da
        w[pts[i].indices] += da * pts[i].values / (lam * ds.n)
    assert np.max(np.abs(w - primal_from_dual(alpha, ds, lam))) <= 1e-10
    state = DualState(alpha, w, lam)
    assert state.is_consistent(ds)


def test_weak_duality_fuzz(model):
    ds = gen_synthetic(50, 6, 1.0, 0.2, seed=8)
    rng = np.random.default_rng(0)
    for _ in range(300):
        lam = 10 ** rng.uniform(-4, 0)
        st_ = DualState.from_alpha(random_feasible_alpha(rng, ds.y), ds, lam)
        gap = duality_gap(st_, ds, model)
        assert gap >= -1e-10
        assert fenchel_gap(st_.alpha, st_.w, ds, model) == pytest.approx(gap, rel=1e-8, abs=1e-9)


def test_gap_small_at_optimum(model):
    from distcocoa.local_solvers import exact_block_solver
    ds = gen_synthetic(25, 4, 1.0, 0.2, seed=3)
    upd = exact_block_solver(ds, np.arange(25), np.zeros(25), np.zeros(4), model, 0.1, tol=1e-12)
    st_ = DualState.from_alpha(upd.delta_alpha, ds, 0.1)
    assert duality_gap(st_, ds, model) <= 1e-8


def test_local_dual_zero_block(small_ds, small_part, model):
    blk = small_part.blocks[0]
    wbar = np.random.default_rng(0).normal(size=small_ds.dim)
    assert local_dual_value(np.zeros(len(blk)), wbar, blk, small_ds, 0.1, model) == 0.0


def test_local_dual_identity(small_ds, small_part, model):
    rng = np.random.default_rng(3)
    lam = 0.05
    for _ in range(30):
        alpha = random_feasible_alpha(rng, small_ds.y)
        k = rng.integers(small_part.K)
        blk = small_part.blocks[k]
        new_blk = random_feasible_alpha(rng, small_ds.y[blk])
        wbar = primal_from_dual(alpha, small_ds, lam) - block_primal_image(alpha[blk], blk, small_ds, lam)
        alt = alpha.copy()
        alt[blk] = new_blk
        lhs = (local_dual_value(alpha[blk], wbar, blk, small_ds, lam, model)
               - local_dual_value(new_blk, wbar, blk, small_ds, lam, model))
        rhs = dual_value(alpha, small_ds, lam, model) - dual_value(alt, small_ds, lam, model)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_local_gap_weak_duality(small_ds, small_part, model):
    rng = np.random.default_rng(5)
    lam = 0.05
    for _ in range(50):
        k = rng.integers(small_part.K)
        blk = small_part.blocks[k]
        a = random_feasible_alpha(rng, small_ds.y[blk])
        wbar = rng.normal(size=small_ds.dim) * 0.5
        g = local_gap(a, wbar, blk, small_ds, lam, model)
        wk = block_primal_image(a, blk, small_ds, lam)
        direct = (local_primal_value(wk, wbar, blk, small_ds, lam, model)
                  - local_dual_value(a, wbar, blk, small_ds, lam, model))
        assert g >= -1e-10
        assert g == pytest.approx(direct, rel=1e-8, abs=1e-10)


def test_dualstate_helpers(small_ds, small_part):
    s = DualState.zeros(small_ds, 0.1)
    s.alpha[:] = small_ds.y * 0.5
    assert not s.is_consistent(small_ds)
    s.resync(small_ds)
    assert s.drift(small_ds) == 0.0
    c = s.copy()
    c.alpha[0] = 0
    assert s.alpha[0] != 0
    assert np.array_equal(s.block(small_part, 1), s.alpha[small_part.blocks[1]])


def test_dual_with_zero_row():
    ds = Dataset(np.array([[0.0, 0.0], [1.0, 0.0]]), [1, -1])
    assert dual_value(np.array([1.0, -1.0]), ds, 1.0, LossModel("hinge")) == pytest.approx(-0.5 * 0.25 + 1.0)
