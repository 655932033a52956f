"""Losses, their conjugates, and the primal/dual objectives of l2-regularized ERM.

Notation follows the usual SDCA setup::

    P(w)     = lam/2 ||w||^2 + 1/n sum_i loss_i(w.x_i)
    D(alpha) = -lam/2 ||A alpha||^2 - 1/n sum_i loss_i*(-alpha_i)
    A_i      = x_i / (lam n),   w(alpha) = A alpha
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kern

LOSSES = ("hinge", "smoothed_hinge", "logistic")
_CODES = {"hinge": kern.HINGE, "smoothed_hinge": kern.SMOOTH_HINGE, "logistic": kern.LOGISTIC}


@dataclass(frozen=True)
class LossModel:
    """A loss family together with its smoothness parameter.

    ``gamma`` is the constant such that the loss is (1/gamma)-smooth, equivalently
    its conjugate is gamma-strongly convex. Hinge has gamma = 0.
    """

    family: str = "hinge"
    smoothing: float = 1.0

    def __post_init__(self):
        if self.family not in LOSSES:
            raise ValueError(f"unknown loss {self.family!r}; expected one of {LOSSES}")
        if self.family == "smoothed_hinge" and not self.smoothing > 0:
            raise ValueError("smoothed hinge needs smoothing > 0")

    @property
    def code(self):
        return _CODES[self.family]

    @property
    def gamma(self):
        if self.family == "hinge":
            return 0.0
        if self.family == "smoothed_hinge":
            return float(self.smoothing)
        return 4.0

    @property
    def is_smooth(self):
        return self.gamma > 0

    def loss(self, margin, label):
        """Vectorized loss_i(margin) for labels in {-1, +1}."""
        z = np.asarray(label, dtype=float) * np.asarray(margin, dtype=float)
        if self.family == "hinge":
            return np.maximum(0.0, 1.0 - z)
        if self.family == "smoothed_hinge":
            g = self.gamma
            return np.where(z >= 1.0, 0.0,
                            np.where(z <= 1.0 - g, 1.0 - z - 0.5 * g, (1.0 - z) ** 2 / (2 * g)))
        return np.logaddexp(0.0, -z)

    def conj(self, alpha, label):
        """Vectorized loss_i*(-alpha); +inf outside the feasible interval."""
        b = np.asarray(label, dtype=float) * np.asarray(alpha, dtype=float)
        feasible = (b >= 0.0) & (b <= 1.0)
        bc = np.clip(b, 0.0, 1.0)
        if self.family == "hinge":
            v = -bc
        elif self.family == "smoothed_hinge":
            v = -bc + 0.5 * self.gamma * bc * bc
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.where(bc > 0, bc * np.log(bc), 0.0) + np.where(bc < 1, (1 - bc) * np.log1p(-bc), 0.0)
        return np.where(feasible, v, np.inf)

    def derivative(self, margin, label):
        """d loss_i / d margin (a subgradient for hinge)."""
        y = np.asarray(label, dtype=float)
        z = y * np.asarray(margin, dtype=float)
        if self.family == "hinge":
            return np.where(z < 1.0, -y, 0.0)
        if self.family == "smoothed_hinge":
            g = self.gamma
            return -y * np.clip((1.0 - z) / g, 0.0, 1.0)
        return -y / (1.0 + np.exp(z))


def loss_eval(model, margin_arg, label):
    return float(model.loss(margin_arg, label))


def conj_eval(model, dual_arg, label):
    """loss*(-dual_arg) for a scalar dual variable."""
    return float(model.conj(dual_arg, label))


def margins(w, ds):
    return ds.X @ w


def primal_value(w, ds, lam, model):
    ds.check_nonempty()
    w = np.asarray(w, dtype=float)
    return 0.5 * lam * float(w @ w) + float(np.mean(model.loss(margins(w, ds), ds.y)))


def primal_from_dual(alpha, ds, lam):
    """w(alpha) = (1/(lam n)) sum_i alpha_i x_i."""
    ds.check_nonempty()
    return ds.X.T @ np.asarray(alpha, dtype=float) / (lam * ds.n)


def dual_value(alpha, ds, lam, model):
    ds.check_nonempty()
    alpha = np.asarray(alpha, dtype=float)
    c = model.conj(alpha, ds.y)
    if np.any(np.isinf(c)):
        return -np.inf
    w = primal_from_dual(alpha, ds, lam)
    return -0.5 * lam * float(w @ w) - float(np.mean(c))


@dataclass
class DualState:
    """Dual vector with its primal image kept in sync (w == A alpha)."""

    alpha: np.ndarray
    w: np.ndarray
    lam: float

    @classmethod
    def zeros(cls, ds, lam):
        return cls(np.zeros(ds.n), np.zeros(ds.dim), float(lam))

    @classmethod
    def from_alpha(cls, alpha, ds, lam):
        alpha = np.array(alpha, dtype=float)
        return cls(alpha, primal_from_dual(alpha, ds, lam), float(lam))

    def block(self, partition, k):
        return self.alpha[partition.blocks[k]]

    def resync(self, ds):
        self.w = primal_from_dual(self.alpha, ds, self.lam)

    def drift(self, ds):
        return float(np.max(np.abs(self.w - primal_from_dual(self.alpha, ds, self.lam)), initial=0.0))

    def is_consistent(self, ds, rtol=1e-8):
        return self.drift(ds) <= rtol * (1.0 + float(np.max(np.abs(self.w), initial=0.0)))

    def copy(self):
        return DualState(self.alpha.copy(), self.w.copy(), self.lam)


def duality_gap(state, ds, model):
    """P(w) - D(alpha) at the state's (w, alpha)."""
    return (primal_value(state.w, ds, state.lam, model)
            - dual_value(state.alpha, ds, state.lam, model))


def fenchel_gap(alpha, w, ds, model, rows=None):
    """(1/n) sum of Fenchel-Young residuals; equals the duality gap when w = A alpha.

    Each residual is nonnegative, so this form avoids the cancellation of P - D.
    """
    rows = np.arange(ds.n) if rows is None else np.asarray(rows)
    m = ds.X[rows] @ w
    a = np.asarray(alpha, dtype=float)
    y = ds.y[rows]
    terms = model.loss(m, y) + model.conj(a, y) + a * m
    return float(np.sum(terms)) / ds.n


# ----------------------------------------------------- block subproblems

def block_primal_image(alpha_blk, block, ds, lam):
    """A_[k] alpha_[k]."""
    return ds.X[block].T @ np.asarray(alpha_blk, dtype=float) / (lam * ds.n)


def local_dual_value(alpha_blk, w_bar, block, ds, lam, model):
    """D_k(alpha_[k]; w_bar), the dual restricted to one block.

    Equals the global dual as a function of the block variables, shifted by a
    constant, when w_bar collects the other blocks' contribution.
    """
    block = np.asarray(block)
    alpha_blk = np.asarray(alpha_blk, dtype=float)
    c = model.conj(alpha_blk, ds.y[block])
    if np.any(np.isinf(c)):
        return -np.inf
    v = np.asarray(w_bar, dtype=float) + block_primal_image(alpha_blk, block, ds, lam)
    wb = np.asarray(w_bar, dtype=float)
    # ||wb + u||^2 - ||wb||^2 expanded to avoid cancellation
    u = v - wb
    return -0.5 * lam * float(2 * wb @ u + u @ u) - float(np.sum(c)) / ds.n


def local_primal_value(w_k, w_bar, block, ds, lam, model):
    """P_k(w_k; w_bar) = 1/n sum_{i in block} loss_i((w_bar + w_k).x_i) + lam/2 ||w_k||^2."""
    block = np.asarray(block)
    w_k = np.asarray(w_k, dtype=float)
    m = ds.X[block] @ (np.asarray(w_bar, dtype=float) + w_k)
    return float(np.sum(model.loss(m, ds.y[block]))) / ds.n + 0.5 * lam * float(w_k @ w_k)


def local_gap(alpha_blk, w_bar, block, ds, lam, model):
    """P_k(A_[k] alpha_[k]; w_bar) - D_k(alpha_[k]; w_bar) in Fenchel-Young form."""
    block = np.asarray(block)
    w = np.asarray(w_bar, dtype=float) + block_primal_image(alpha_blk, block, ds, lam)
    return fenchel_gap(alpha_blk, w, ds, model, rows=block)
