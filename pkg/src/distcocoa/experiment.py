"""Config-driven experiment runs, reference solutions and parameter sweeps."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import METHODS as BASELINE_METHODS
from .baselines import BaselineConfig, run_baseline
from .cocoa import CocoaConfig, run_cocoa
from .data import gen_synthetic, load_libsvm, partition_uniform, scale_to_unit_norm
from .exceptions import ConfigError
from .local_solvers import LocalSolverConfig, exact_block_solver
from .objectives import DualState, LossModel, dual_value, fenchel_gap, primal_value
from .runtime import DIRECTIONS, CostModel, Runtime, ledger_report
from .theory import SIGMA_DENSE_CAP, theory_report
from .trace import rounds_to_target

log = logging.getLogger(__name__)

METHODS = ("cocoa",) + BASELINE_METHODS
GAP_TARGETS = (1e-2, 1e-3)
SELECTION_NOTE = ("best settings are ranked by rounds/vectors to reach the targets; "
                  "wall-clock selection is not reproduced")


@dataclass
class ExperimentConfig:
    data: str | None = None
    synthetic: tuple | None = (1000, 20, 1.0, 0.1)
    data_seed: int = 0
    n_features: int | None = None
    lam: float = 1e-3
    loss: str = "hinge"
    smoothing: float = 1.0
    method: str = "cocoa"
    K: int = 4
    H: int | None = None
    beta: float = 1.0
    T: int = 50
    seeds: tuple = (0,)
    out: str = "runs"
    count_direction: str = "both"
    ref_tol: float = 1e-10
    ref_max_epochs: int = 100_000
    partition: str = "random"
    executor: str = "serial"
    local_mode: str = "sdca"
    eval_every: int = 1
    latency_per_vector: float = CostModel.latency_per_vector
    time_per_update: float = CostModel.time_per_update
    cache_dir: str | None = None

    _ALIASES = {"lambda": "lam", "workers": "K"}

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        kw = {}
        for key, value in d.items():
            key = cls._ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            kw[key] = value
        if "synthetic" in kw and isinstance(kw["synthetic"], (list, tuple)):
            kw["synthetic"] = tuple(kw["synthetic"])
        if "seeds" in kw:
            kw["seeds"] = tuple(kw["seeds"]) if isinstance(kw["seeds"], (list, tuple)) else (kw["seeds"],)
        if kw.get("data") is not None and "synthetic" not in kw:
            kw["synthetic"] = None
        return cls(**kw).validate()

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self):
        if (self.data is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of data or synthetic")
        if self.synthetic is not None and len(self.synthetic) != 4:
            raise ConfigError("synthetic must be (n, d, sparsity, noise)")
        if not (isinstance(self.lam, (int, float)) and self.lam > 0):
            raise ConfigError("lambda must be > 0")
        if self.loss not in ("hinge", "smoothed_hinge", "logistic"):
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.method in ("minibatch_sgd", "local_sgd") and self.loss != "hinge":
            raise ConfigError(f"{self.method} is defined for the hinge loss only")
        if not isinstance(self.K, int) or self.K < 1:
            raise ConfigError("K must be an integer >= 1")
        if self.H is not None and (not isinstance(self.H, int) or self.H < 1):
            raise ConfigError("H must be an integer >= 1")
        if not isinstance(self.T, int) or self.T < 1:
            raise ConfigError("T must be an integer >= 1")
        if len(self.seeds) < 1:
            raise ConfigError("at least one seed is required")
        if not self.ref_tol > 0:
            raise ConfigError("ref_tol must be > 0")
        if not isinstance(self.ref_max_epochs, int) or self.ref_max_epochs < 1:
            raise ConfigError("ref_max_epochs must be an integer >= 1")
        if self.count_direction not in DIRECTIONS:
            raise ConfigError(f"count_direction must be one of {DIRECTIONS}")
        if self.partition not in ("random", "ordered"):
            raise ConfigError("partition must be 'random' or 'ordered'")
        if self.executor not in ("serial", "threads"):
            raise ConfigError("executor must be 'serial' or 'threads'")
        if self.local_mode not in ("sdca", "exact"):
            raise ConfigError("local_mode must be 'sdca' or 'exact'")
        return self

    def resolved(self):
        d = dataclasses.asdict(self)
        d["synthetic"] = list(self.synthetic) if self.synthetic is not None else None
        d["seeds"] = list(self.seeds)
        return d


def load_dataset(cfg):
    """Returns (dataset scaled to unit max norm, scale factor M)."""
    if cfg.data is not None:
        ds = load_libsvm(cfg.data, n_features=cfg.n_features)
        ds.check_nonempty()
        return scale_to_unit_norm(ds)
    n, d, sparsity, noise = cfg.synthetic
    ds = gen_synthetic(int(n), int(d), float(sparsity), float(noise), seed=cfg.data_seed)
    return ds, 1.0


# --------------------------------------------------------------- reference

@dataclass
class ReferenceSolution:
    p_star: float
    d_star: float
    gap: float
    alpha: np.ndarray = field(repr=False)


def _ref_key(ds, lam, model, tol):
    raw = f"{ds.fingerprint()}|{lam!r}|{model.family}|{model.gamma!r}|{tol!r}"
    return hashlib.sha256(raw.encode()).hexdigest()[:24]


def reference_solve(ds, lam, model, tol=1e-10, cache_dir=None, max_epochs=100_000):
    """Single-worker exact solve to duality gap <= tol, optionally cached on disk.

    The cache key covers the data fingerprint, lambda, loss and tolerance;
    files are written atomically so concurrent runs never read a partial file.
    """
    if not tol > 0:
        raise ConfigError("tol must be > 0")
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"ref_{_ref_key(ds, lam, model, tol)}.npz"
        if path.exists():
            z = np.load(path)
            return ReferenceSolution(float(z["p_star"]), float(z["d_star"]), float(z["gap"]), z["alpha"])
    upd = exact_block_solver(ds, np.arange(ds.n), np.zeros(ds.n), np.zeros(ds.dim), model, lam,
                             tol=tol, max_epochs=max_epochs)
    state = DualState.from_alpha(upd.delta_alpha, ds, lam)
    p = primal_value(state.w, ds, lam, model)
    d = dual_value(state.alpha, ds, lam, model)
    ref = ReferenceSolution(p, d, fenchel_gap(state.alpha, state.w, ds, model), state.alpha)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz")
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, p_star=ref.p_star, d_star=ref.d_star, gap=ref.gap, alpha=ref.alpha)
        os.replace(tmp, path)
    return ref


# -------------------------------------------------------------------- runs

def _partition(cfg, ds, seed):
    return partition_uniform(ds.n, cfg.K, seed=seed, shuffle=cfg.partition == "random")


def solve(cfg, ds, partition, seed, stop=None):
    """Run the configured method once and return its Trace."""
    model = LossModel(cfg.loss, cfg.smoothing)
    cost = CostModel(cfg.latency_per_vector, cfg.time_per_update)
    with Runtime(partition.K, ds.dim, executor=cfg.executor) as rt:
        kw = dict(runtime=rt, cost=cost, direction=cfg.count_direction, stop=stop)
        if cfg.method == "cocoa":
            H = cfg.H if cfg.H is not None else partition.n_tilde
            ccfg = CocoaConfig(T=cfg.T, beta_K=float(cfg.beta), lam=float(cfg.lam),
                               local=LocalSolverConfig(H=H, mode=cfg.local_mode),
                               seed=seed, eval_every=cfg.eval_every)
            return run_cocoa(ds, partition, model, ccfg, **kw)
        H = cfg.H if cfg.H is not None else 1
        bcfg = BaselineConfig(method=cfg.method, H=H, beta=float(cfg.beta), T=cfg.T,
                              lam=float(cfg.lam), seed=seed, eval_every=cfg.eval_every)
        return run_baseline(ds, partition, model, bcfg, **kw)


def _summary(trace, p_star, targets=GAP_TARGETS):
    out = {}
    for target in targets:
        hit = rounds_to_target(trace, p_star, target)
        out[f"{target:g}"] = None if hit is None else {"rounds": hit[0], "vectors": hit[1]}
    return out


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def run_experiment(cfg, tag=None):
    """Run every seed; write one CSV trace and one JSON report per seed.

    Returns a list of per-seed report dicts (each also holding the Trace under
    the non-serialized key ``"trace"``).
    """
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ds, scale = load_dataset(cfg)
    model = LossModel(cfg.loss, cfg.smoothing)
    cache = cfg.cache_dir if cfg.cache_dir is not None else out / ".refcache"
    ref = reference_solve(ds, cfg.lam, model, tol=cfg.ref_tol, cache_dir=cache,
                          max_epochs=cfg.ref_max_epochs)
    tag = tag or cfg.method
    reports = []
    for seed in cfg.seeds:
        partition = _partition(cfg, ds, seed)
        trace = solve(cfg, ds, partition, seed)
        csv_path = out / f"{tag}_seed{seed}.csv"
        trace.write_csv(csv_path)
        resolved = cfg.resolved()
        if resolved["H"] is None:
            resolved["H"] = partition.n_tilde if cfg.method == "cocoa" else 1
        report = {
            "config": resolved,
            "seed": seed,
            "method": cfg.method,
            "data": {"n": ds.n, "d": ds.dim, "nnz": int(ds.X.nnz), "scale_factor": scale},
            "reference": {"p_star": ref.p_star, "d_star": ref.d_star, "gap": ref.gap},
            "final": {"round": trace.final.round, "primal": trace.final.primal,
                      "dual": trace.final.dual, "gap": trace.final.gap,
                      "primal_suboptimality": trace.final.primal - ref.p_star},
            "diverged": trace.diverged,
            "divergence_round": trace.divergence_round,
            "targets": _summary(trace, ref.p_star),
            "ledger": ledger_report(trace.ledger, cfg.count_direction),
            "time_axis": "synthetic (cost model), not measured",
            "trace_csv": csv_path.name,
            "theory": None,
        }
        if model.is_smooth and ds.n <= SIGMA_DENSE_CAP and cfg.method == "cocoa":
            H = resolved["H"]
            d0 = ref.d_star - dual_value(np.zeros(ds.n), ds, cfg.lam, model)
            report["theory"] = dataclasses.asdict(
                theory_report(ds, partition, cfg.lam, model, H, cfg.T, d0_gap=d0))
        _write_json(out / f"{tag}_seed{seed}.json", report)
        report["trace"] = trace
        reports.append(report)
    return reports


SWEEP_AXES = ("H", "beta", "method")


def sweep(cfg, axis, values, budget=None):
    """One run per axis value plus a summary of rounds/vectors to each gap target.

    With ``budget`` (total coordinate updates), T is set to budget // (K H)
    for every value so all runs do the same amount of local work.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    rows = []
    for value in values:
        if axis == "H":
            sub = dataclasses.replace(cfg, H=int(value))
        elif axis == "beta":
            sub = dataclasses.replace(cfg, beta=float(value))
        else:
            sub = dataclasses.replace(cfg, method=str(value))
        if budget is not None:
            H = sub.H if sub.H is not None else math.ceil(_n_of(sub) / sub.K)
            T = budget // (sub.K * H)
            if T < 1:
                raise ConfigError(f"budget {budget} is below one round at H={H}")
            sub = dataclasses.replace(sub, T=int(T))
        sub.validate()
        reports = run_experiment(sub, tag=f"sweep_{axis}_{value}")
        for rep in reports:
            rows.append({"value": value, "seed": rep["seed"], "T": sub.T,
                         "rounds": rep["final"]["round"],
                         "vectors": rep["ledger"]["vectors"],
                         "updates": rep["ledger"]["coordinate_updates"],
                         "final_gap": rep["final"]["gap"],
                         "final_suboptimality": rep["final"]["primal_suboptimality"],
                         "diverged": rep["diverged"],
                         "targets": rep["targets"]})
    summary = {"axis": axis, "values": values, "budget": budget, "rows": rows,
               "gap_targets": list(GAP_TARGETS), "selection": SELECTION_NOTE}
    _write_json(Path(cfg.out) / f"sweep_{axis}_summary.json", summary)
    return summary


def _n_of(cfg):
    if cfg.synthetic is not None:
        return int(cfg.synthetic[0])
    return load_dataset(cfg)[0].n
