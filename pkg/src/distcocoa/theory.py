"""Convergence constants for CoCoA with LocalSDCA on smooth losses."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import ConfigError
from .local_solvers import exact_block_solver
from .objectives import block_primal_image, local_dual_value

SIGMA_DENSE_CAP = 2000


def cross_block_matrix(ds, partition):
    """BlockDiag(G) - G for the Gram matrix G = X X^T of the raw rows."""
    G = (ds.X @ ds.X.T).toarray()
    owner = partition.owner()
    same = owner[:, None] == owner[None, :]
    return np.where(same, 0.0, -G)


def sigma_min(ds, partition):
    """Largest eigenvalue of BlockDiag(G) - G, clamped at zero.

    This is the max over alpha of
    (sum_k ||X_[k] alpha_[k]||^2 - ||X alpha||^2) / ||alpha||^2.
    """
    partition.validate(ds.n)
    if ds.n > SIGMA_DENSE_CAP:
        raise ConfigError(
            f"n={ds.n} exceeds the dense eigen cap ({SIGMA_DENSE_CAP}); "
            f"use the upper bound n_tilde={partition.n_tilde} instead")
    if partition.K == 1:
        return 0.0
    B = cross_block_matrix(ds, partition)
    top = float(np.linalg.eigvalsh(B)[-1])
    return max(top, 0.0)


def theta_local_sdca(lam, n, gamma, n_tilde, H):
    """Local geometric improvement factor of H LocalSDCA steps."""
    if not gamma > 0:
        raise ConfigError("theory requires smooth loss (gamma > 0)")
    if H < 1:
        raise ConfigError("H must be >= 1")
    s = lam * n * gamma / (1.0 + lam * n * gamma)
    return (1.0 - s / n_tilde) ** H


def rate_per_round(K, theta, lam, n, gamma, sigma):
    lng = lam * n * gamma
    return 1.0 - (1.0 - theta) * (1.0 / K) * lng / (sigma + lng)


def rate_bound(T, K, theta, lam, n, gamma, sigma, d0_gap=1.0):
    """Upper bound on E[D(alpha*) - D(alpha^(T))]."""
    return rate_per_round(K, theta, lam, n, gamma, sigma) ** T * d0_gap


def local_suboptimality(ds, partition, k, alpha, model, lam, tol=1e-10):
    """Dual improvement available by optimizing block k alone (others fixed)."""
    block = partition.blocks[k]
    alpha = np.asarray(alpha, dtype=float)
    a_blk = alpha[block]
    w = ds.X.T @ alpha / (lam * ds.n)
    w_bar = w - block_primal_image(a_blk, block, ds, lam)
    upd = exact_block_solver(ds, block, a_blk, w, model, lam, tol=tol)
    best = local_dual_value(a_blk + upd.delta_alpha, w_bar, block, ds, lam, model)
    here = local_dual_value(a_blk, w_bar, block, ds, lam, model)
    return best - here


@dataclass(frozen=True)
class TheoryReport:
    sigma_min: float
    theta: float
    rate_per_round: float
    bound_at_T: float
    gamma: float
    n_tilde: int
    K: int
    H: int
    T: int
    lam: float
    n: int

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def theory_report(ds, partition, lam, model, H, T, d0_gap=1.0):
    """Evaluate every constant of the geometric rate for one configuration."""
    sig = sigma_min(ds, partition)
    theta = theta_local_sdca(lam, ds.n, model.gamma, partition.n_tilde, H)
    rate = rate_per_round(partition.K, theta, lam, ds.n, model.gamma, sig)
    return TheoryReport(sig, theta, rate, rate ** T * d0_gap, model.gamma,
                        partition.n_tilde, partition.K, H, T, lam, ds.n)
