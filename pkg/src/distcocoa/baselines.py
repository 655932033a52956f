"""Mini-batch SDCA, mini-batch Pegasos and locally-updating Pegasos.

All three share the bulk-synchronous runtime with CoCoA, so per-round
communication is identical and comparisons reduce to rounds-to-target.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np

from . import _kernels as kern
from .cocoa import Recorder, worker_seed
from .exceptions import ConfigError
from .local_solvers import LocalUpdate
from .objectives import DualState
from .runtime import CostModel, Runtime
from .trace import Trace

METHODS = ("minibatch_cd", "minibatch_sgd", "local_sgd")
DIVERGENCE_PATIENCE = 5  # rounds below the best dual before flagging


@dataclass(frozen=True)
class BaselineConfig:
    """Settings shared by the baselines.

    ``beta`` scales the merged update: ``beta / (K H)`` per contribution for
    the mini-batch methods, ``beta / K`` per worker for local SGD.
    ``step_index`` picks the Pegasos step counter: ``"round"`` uses the outer
    round t, ``"global"`` the per-worker inner step count; ``None`` uses the
    method default (round for mini-batch SGD, global for local SGD).
    """

    method: str = "minibatch_cd"
    H: int = 1
    beta: float = 1.0
    T: int = 10
    lam: float = 1e-3
    seed: int = 0
    eval_every: int = 1
    step_index: str | None = None

    def validate(self, K, partition=None):
        if self.method not in METHODS:
            raise ConfigError(f"unknown baseline {self.method!r}")
        if self.T < 1 or self.H < 1:
            raise ConfigError("T and H must be >= 1")
        if not self.lam > 0:
            raise ConfigError("lambda must be > 0")
        hi = K if self.method == "local_sgd" else K * self.H
        if not 1.0 <= self.beta <= hi:
            raise ConfigError(f"beta must lie in [1, {hi}] for {self.method}, got {self.beta}")
        if self.step_index not in (None, "round", "global"):
            raise ConfigError("step_index must be 'round' or 'global'")
        if self.method != "local_sgd" and partition is not None and self.H > min(partition.sizes):
            raise ConfigError(f"H={self.H} exceeds the smallest block ({min(partition.sizes)})")
        return self


def _csr(ds):
    return ds.X.indptr, ds.X.indices, ds.X.data


def _batch(n_k, H, seed):
    """H distinct positions of a block of size n_k."""
    return np.random.default_rng(seed).choice(n_k, size=H, replace=False)


def _setup(ds, partition, cfg, runtime, cost):
    ds.check_nonempty().check_binary()
    partition.validate(ds.n)
    cfg.validate(partition.K, partition)
    runtime = runtime or Runtime(partition.K, ds.dim)
    return runtime, cost or CostModel()


def run_minibatch_cd(ds, partition, model, cfg, runtime=None, cost=None,
                     direction="both", stop=None):
    """Mini-batch dual coordinate ascent: every step in a round sees the same w."""
    runtime, cost = _setup(ds, partition, cfg, runtime, cost)
    K, lam, lam_n = partition.K, cfg.lam, cfg.lam * ds.n
    state = DualState.zeros(ds, lam)
    rec = Recorder(ds, model, lam, runtime, cost, direction, K)
    trace = Trace("minibatch_cd", ledger=runtime.ledger)
    trace.records.append(rec.record(0, state.w, state.alpha))
    scale = cfg.beta / (K * cfg.H)
    # rounds in a row spent below the best dual seen so far
    drops = 0
    best = trace.records[-1].dual
    since_resync = 0

    def task(k, alpha_blk, w, seed):
        block = partition.blocks[k]
        picks = _batch(len(block), cfg.H, seed)
        da, dw = kern.stale_steps(*_csr(ds), ds.y, ds.sq_norms, block, alpha_blk, w, picks,
                                  model.code, model.gamma, lam_n)
        return LocalUpdate(da, dw, cfg.H)

    def merge(results):
        for k, res in enumerate(results):
            state.alpha[partition.blocks[k]] += scale * res.delta_alpha
        total = np.zeros(ds.dim)
        for res in results:
            total += res.delta_w
        state.w += scale * total

    for t in range(1, cfg.T + 1):
        w_snap = state.w.copy()
        w_snap.flags.writeable = False
        tasks = [partial(task, k, state.alpha[b].copy(), w_snap, worker_seed(cfg.seed, t, k))
                 for k, b in enumerate(partition.blocks)]
        runtime.execute_round(tasks, merge)
        since_resync += K * cfg.H
        if since_resync >= ds.n:
            state.resync(ds)
            since_resync = 0
        if t % cfg.eval_every and t != cfg.T:
            continue
        r = rec.record(t, state.w, state.alpha)
        drops = drops + 1 if r.dual < best else 0
        best = max(best, r.dual)
        trace.records.append(r)
        if drops > DIVERGENCE_PATIENCE and not trace.diverged:
            trace.diverged = True
            trace.divergence_round = t
        if stop is not None and stop(r):
            break
    trace.w, trace.alpha = state.w, state.alpha
    trace.meta.update(K=K, H=cfg.H, beta=cfg.beta, lam=lam)
    return trace


def _run_sgd(ds, partition, model, cfg, runtime, cost, direction, stop, local):
    if model.family != "hinge":
        raise ConfigError("the Pegasos baselines are defined for the hinge loss")
    runtime, cost = _setup(ds, partition, cfg, runtime, cost)
    K, lam, H = partition.K, cfg.lam, cfg.H
    step_index = cfg.step_index or ("global" if local else "round")
    w = np.zeros(ds.dim)
    rec = Recorder(ds, model, lam, runtime, cost, direction, K)
    trace = Trace("local_sgd" if local else "minibatch_sgd", ledger=runtime.ledger)
    trace.records.append(rec.record(0, w))
    scale = cfg.beta / K if local else cfg.beta / (K * H)

    def task(k, w_snap, t, seed):
        block = partition.blocks[k]
        if local:
            picks = np.random.default_rng(seed).integers(0, len(block), size=H)
            if step_index == "global":
                dw = kern.pegasos_local(*_csr(ds), ds.y, block, w_snap, picks, lam, (t - 1) * H)
            else:
                # constant step 1/(lam t) within the round
                dw = kern.pegasos_local_const(*_csr(ds), ds.y, block, w_snap, picks,
                                              1.0 / (lam * t), lam)
        else:
            picks = _batch(len(block), H, seed)
            eta = 1.0 / (lam * (t if step_index == "round" else (t - 1) * H + 1))
            dw = kern.pegasos_batch(*_csr(ds), ds.y, block, w_snap, picks, eta, lam)
        return LocalUpdate(None, dw, H)

    def merge(results):
        total = np.zeros(ds.dim)
        for res in results:
            total += res.delta_w
        w[:] += scale * total

    for t in range(1, cfg.T + 1):
        w_snap = w.copy()
        w_snap.flags.writeable = False
        tasks = [partial(task, k, w_snap, t, worker_seed(cfg.seed, t, k)) for k in range(K)]
        runtime.execute_round(tasks, merge)
        if t % cfg.eval_every and t != cfg.T:
            continue
        r = rec.record(t, w)
        trace.records.append(r)
        if stop is not None and stop(r):
            break
    trace.w = w
    trace.meta.update(K=K, H=H, beta=cfg.beta, lam=lam, step_index=step_index)
    return trace


def run_minibatch_sgd(ds, partition, model, cfg, runtime=None, cost=None,
                      direction="both", stop=None):
    """Mini-batch Pegasos: K*H subgradients at a fixed w, averaged (scaled by beta)."""
    return _run_sgd(ds, partition, model, cfg, runtime, cost, direction, stop, local=False)


def run_local_sgd(ds, partition, model, cfg, runtime=None, cost=None,
                  direction="both", stop=None):
    """Each worker runs H sequential Pegasos steps; the K results are averaged."""
    return _run_sgd(ds, partition, model, cfg, runtime, cost, direction, stop, local=True)


def run_baseline(ds, partition, model, cfg, **kw):
    fn = {"minibatch_cd": run_minibatch_cd, "minibatch_sgd": run_minibatch_sgd,
          "local_sgd": run_local_sgd}[cfg.method]
    return fn(ds, partition, model, cfg, **kw)
