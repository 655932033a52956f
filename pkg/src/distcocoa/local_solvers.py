"""Per-worker dual solvers.

A local solver receives its block of dual variables and a primal vector ``w``
consistent with the full dual (``w = A alpha``), and returns a
:class:`LocalUpdate` ``(delta_alpha, delta_w)`` with ``delta_w = A_[k] delta_alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .exceptions import ConfigError, ConvergenceError


@dataclass
class LocalUpdate:
    delta_alpha: np.ndarray
    delta_w: np.ndarray
    steps: int = 0


@dataclass(frozen=True)
class LocalSolverConfig:
    H: int = 1
    seed: int = 0
    mode: str = "sdca"
    tol: float = 1e-10
    max_epochs: int = 10_000

    def __post_init__(self):
        if self.mode not in ("sdca", "exact"):
            raise ConfigError(f"unknown local solver mode {self.mode!r}")
        if self.H < 1:
            raise ConfigError("H must be >= 1")
        if self.mode == "exact" and not self.tol > 0:
            raise ConfigError("exact mode needs tol > 0")


def _csr(ds):
    X = ds.X
    return X.indptr, X.indices, X.data


def coordinate_update(model, lam, n, x_i, y_i, alpha_i, w_current):
    """Closed-form (Newton for logistic) maximizer of the one-coordinate dual step.

    ``x_i`` is a dense vector or :class:`~distcocoa.data.SparseVector`.
    """
    if hasattr(x_i, "indices"):
        m = float(np.dot(x_i.values, np.asarray(w_current)[x_i.indices]))
        q = float(np.dot(x_i.values, x_i.values))
    else:
        x_i = np.asarray(x_i, dtype=float)
        m = float(x_i @ w_current)
        q = float(x_i @ x_i)
    return kern.coordinate_step(model.code, model.gamma, lam * n, float(y_i),
                                float(alpha_i), m, q)


def sample_picks(n_k, H, seed):
    """H positions drawn uniformly with replacement from 0..n_k-1."""
    return np.random.default_rng(seed).integers(0, n_k, size=H)


def local_sdca(ds, block, alpha_blk, w, model, lam, cfg, picks=None):
    """H randomized coordinate-ascent steps on one block of the dual.

    The worker applies each step to its private copy of ``w`` before picking
    the next coordinate. ``picks`` overrides the sampled coordinate sequence.
    """
    block = np.asarray(block, dtype=np.int64)
    nk = len(block)
    if nk == 0:
        return LocalUpdate(np.zeros(0), np.zeros(ds.dim), 0)
    if picks is None:
        picks = sample_picks(nk, cfg.H, cfg.seed)
    dalpha, dw = kern.local_sdca(*_csr(ds), ds.y, ds.sq_norms, block,
                                 np.asarray(alpha_blk, dtype=float),
                                 np.asarray(w, dtype=float),
                                 np.asarray(picks, dtype=np.int64),
                                 model.code, model.gamma, lam * ds.n)
    return LocalUpdate(dalpha, dw, len(picks))


def exact_block_solver(ds, block, alpha_blk, w, model, lam, tol=1e-10,
                       max_epochs=10_000, seed=0):
    """Maximize the dual over one block (others fixed) until the block gap <= tol.

    Runs epochs of coordinate steps over random permutations of the block
    and checks the local duality gap after each epoch.
    """
    block = np.asarray(block, dtype=np.int64)
    nk = len(block)
    if nk == 0:
        return LocalUpdate(np.zeros(0), np.zeros(ds.dim), 0)
    indptr, indices, data = _csr(ds)
    alpha0 = np.asarray(alpha_blk, dtype=float)
    w0 = np.asarray(w, dtype=float)
    a, wl = alpha0.copy(), w0.copy()
    total_da = np.zeros(nk)
    total_dw = np.zeros(ds.dim)
    rng = np.random.default_rng(seed)
    lam_n = lam * ds.n
    gap = kern.block_gap(indptr, indices, data, ds.y, block, a, wl, model.code, model.gamma, ds.n)
    steps = 0
    for _ in range(max_epochs):
        if gap <= tol:
            break
        picks = rng.permutation(nk)
        da, dw = kern.local_sdca(indptr, indices, data, ds.y, ds.sq_norms, block, a, wl,
                                 picks, model.code, model.gamma, lam_n)
        steps += nk
        a += da
        total_da += da
        total_dw += dw
        # rebuild the local image from the block to keep drift at round-off level
        wl = w0 + ds.X[block].T @ total_da / lam_n
        gap = kern.block_gap(indptr, indices, data, ds.y, block, a, wl, model.code, model.gamma, ds.n)
    else:
        if gap > tol:
            raise ConvergenceError(f"block solve did not reach tol={tol:g} in {max_epochs} epochs", gap)
    return LocalUpdate(total_da, ds.X[block].T @ total_da / lam_n, steps)


def solve_local(ds, block, alpha_blk, w, model, lam, cfg, seed=None):
    """Dispatch on ``cfg.mode``; ``seed`` overrides ``cfg.seed``."""
    seed = cfg.seed if seed is None else seed
    if cfg.mode == "exact":
        return exact_block_solver(ds, block, alpha_blk, w, model, lam, tol=cfg.tol,
                                  max_epochs=cfg.max_epochs, seed=seed)
    picks = sample_picks(len(block), cfg.H, seed) if len(block) else None
    return local_sdca(ds, block, alpha_blk, w, model, lam, cfg, picks=picks)
