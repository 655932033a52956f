"""The outer communication loop: parallel local dual solves merged with weight beta_K / K."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .exceptions import ConfigError, DivergenceError
from .local_solvers import LocalSolverConfig, solve_local
from .objectives import DualState, dual_value, primal_value
from .runtime import CostModel, Runtime
from .trace import Trace, TraceRecord

DUAL_DROP_GUARD = 1e-6


@dataclass(frozen=True)
class CocoaConfig:
    T: int = 10
    beta_K: float = 1.0
    lam: float = 1e-3
    local: LocalSolverConfig = field(default_factory=LocalSolverConfig)
    seed: int = 0
    eval_every: int = 1
    gap_tol: float | None = None

    def validate(self, K):
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if not self.lam > 0:
            raise ConfigError("lambda must be > 0")
        if not 1.0 <= self.beta_K <= K:
            raise ConfigError(f"beta_K must lie in [1, K={K}], got {self.beta_K}")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        return self


def worker_seed(master_seed, t, k):
    """Reproducible, decorrelated seed for worker k in round t."""
    return int(np.random.SeedSequence([int(master_seed), int(t), int(k)]).generate_state(1)[0])


class Recorder:
    """Builds TraceRecords from the runtime ledger and current iterate."""

    def __init__(self, ds, model, lam, runtime, cost, direction, K):
        self.ds, self.model, self.lam = ds, model, lam
        self.runtime, self.cost, self.direction, self.K = runtime, cost, direction, K

    def record(self, t, w, alpha=None):
        led = self.runtime.ledger
        p = primal_value(w, self.ds, self.lam, self.model)
        d = dual_value(alpha, self.ds, self.lam, self.model) if alpha is not None else float("nan")
        vecs = led.vectors(self.direction)
        return TraceRecord(t, led.coordinate_updates / self.ds.n, led.coordinate_updates, vecs,
                           p, d, p - d, self.cost.elapsed(vecs, led.coordinate_updates, self.K))


def run_cocoa(ds, partition, model, cfg, runtime=None, cost=None, direction="both",
              stop=None):
    """Run T outer rounds and return a :class:`Trace` (round 0 is the start point).

    Parameters
    ----------
    stop : callable, optional
        ``stop(record) -> bool`` checked after each evaluated round.
    """
    ds.check_nonempty().check_binary()
    partition.validate(ds.n)
    K = partition.K
    cfg.validate(K)
    runtime = runtime or Runtime(K, ds.dim)
    cost = cost or CostModel()
    lam = cfg.lam
    state = DualState.zeros(ds, lam)
    rec = Recorder(ds, model, lam, runtime, cost, direction, K)
    trace = Trace("cocoa", ledger=runtime.ledger)
    trace.records.append(rec.record(0, state.w, state.alpha))
    last_dual = trace.records[-1].dual
    scale = cfg.beta_K / K
    since_resync = 0

    def task(k, alpha_blk, w, seed):
        return solve_local(ds, partition.blocks[k], alpha_blk, w, model, lam, cfg.local, seed=seed)

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
        before = runtime.ledger.coordinate_updates
        runtime.execute_round(tasks, merge)
        since_resync += runtime.ledger.coordinate_updates - before
        if since_resync >= ds.n:
            state.resync(ds)
            since_resync = 0
        if t % cfg.eval_every and t != cfg.T:
            continue
        r = rec.record(t, state.w, state.alpha)
        trace.records.append(r)
        if cfg.beta_K == 1.0 and r.dual < last_dual - DUAL_DROP_GUARD:
            raise DivergenceError(
                f"dual decreased by {last_dual - r.dual:.3e} in round {t} with beta_K=1")
        last_dual = r.dual
        if cfg.gap_tol is not None and r.gap <= cfg.gap_tol:
            break
        if stop is not None and stop(r):
            break
    trace.w = state.w
    trace.alpha = state.alpha
    trace.meta.update(K=K, H=cfg.local.H, beta=cfg.beta_K, lam=lam, local_mode=cfg.local.mode)
    return trace
