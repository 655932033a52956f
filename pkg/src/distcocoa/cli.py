"""Command-line entry point: ``distcocoa run|sweep|theory``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .exceptions import ConfigError, ConvergenceError, DivergenceError, ParseError
from .experiment import METHODS, SWEEP_AXES, ExperimentConfig, load_dataset, run_experiment, sweep
from .data import partition_uniform
from .objectives import LossModel
from .runtime import DIRECTIONS
from .theory import theory_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

log = logging.getLogger("distcocoa")


def _csv_list(conv):
    def parse(text):
        try:
            return [conv(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _synthetic(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected n,d,sparsity,noise")
    n, d, sparsity, noise = parts
    return (int(n), int(d), float(sparsity), float(noise))


def _common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="LIBSVM file")
    src.add_argument("--synthetic", type=_synthetic, metavar="N,D,SPARSITY,NOISE")
    p.add_argument("--data-seed", type=int)
    p.add_argument("--n-features", type=int)
    p.add_argument("--loss", choices=("hinge", "smoothed_hinge", "logistic"))
    p.add_argument("--smoothing", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--K", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--seeds", type=_csv_list(int))
    p.add_argument("--out")
    p.add_argument("--count-direction", choices=DIRECTIONS)
    p.add_argument("--ref-tol", type=float)
    p.add_argument("--ref-max-epochs", type=int)
    p.add_argument("--partition", choices=("random", "ordered"))
    p.add_argument("--executor", choices=("serial", "threads"))
    p.add_argument("--local-mode", choices=("sdca", "exact"))
    p.add_argument("--eval-every", type=int)
    p.add_argument("--cache-dir")
    p.add_argument("-v", "--verbose", action="store_true")


_FLAG_FIELDS = ("data", "synthetic", "data_seed", "n_features", "loss", "smoothing", "lam",
                "method", "K", "H", "beta", "T", "seeds", "out", "count_direction", "ref_tol",
                "ref_max_epochs", "partition", "executor", "local_mode", "eval_every", "cache_dir")


def build_config(args):
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    cfg = ExperimentConfig.from_dict(base) if base else ExperimentConfig()
    overrides = {f: getattr(args, f) for f in _FLAG_FIELDS if getattr(args, f, None) is not None}
    if "data" in overrides:
        overrides["synthetic"] = None
    elif "synthetic" in overrides:
        overrides["data"] = None
    if "seeds" in overrides:
        overrides["seeds"] = tuple(overrides["seeds"])
    return dataclasses.replace(cfg, **overrides).validate()


def make_parser():
    parser = argparse.ArgumentParser(prog="distcocoa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one method for every seed")
    _common(run)
    sw = sub.add_parser("sweep", help="sweep H, beta or method")
    _common(sw)
    sw.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sw.add_argument("--values", type=_csv_list(str), required=True)
    sw.add_argument("--budget", type=int, help="total coordinate updates per run")
    th = sub.add_parser("theory", help="print the convergence constants as JSON")
    _common(th)
    return parser


def _sweep_values(axis, values):
    if axis == "H":
        return [int(v) for v in values]
    if axis == "beta":
        return [float(v) for v in values]
    return values


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "run":
            reports = run_experiment(cfg)
            for rep in reports:
                print(f"seed {rep['seed']}: rounds={rep['final']['round']} "
                      f"gap={rep['final']['gap']:.3e} "
                      f"subopt={rep['final']['primal_suboptimality']:.3e} "
                      f"vectors={rep['ledger']['vectors']} -> {cfg.out}/{rep['trace_csv']}")
        elif args.command == "sweep":
            summary = sweep(cfg, args.axis, _sweep_values(args.axis, args.values), budget=args.budget)
            for row in summary["rows"]:
                print(f"{args.axis}={row['value']} seed={row['seed']} rounds={row['rounds']} "
                      f"vectors={row['vectors']} targets={json.dumps(row['targets'])}")
        else:
            ds, _ = load_dataset(cfg)
            part = partition_uniform(ds.n, cfg.K, seed=cfg.seeds[0], shuffle=cfg.partition == "random")
            H = cfg.H if cfg.H is not None else part.n_tilde
            rep = theory_report(ds, part, cfg.lam, LossModel(cfg.loss, cfg.smoothing), H, cfg.T)
            print(rep.to_json())
    except (ConfigError, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, DivergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
