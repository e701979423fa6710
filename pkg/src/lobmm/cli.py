"""Command line entry point: ``lobmm {train,eval,bench,sweep,gen-data}``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import harness
from .config import ExperimentConfig
from .errors import LobError
from .feed import write_day


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _checkpoint(args, default_name="weights.ckpt"):
    return args.checkpoint or os.path.join(args.out, default_name)


def cmd_train(args) -> int:
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    train_days, test_days = harness.split_days(cfg, harness.load_days(cfg))
    progress = None
    if args.verbose:
        def progress(pt):
            print(f"episode {pt.episode} eps={pt.epsilon:.4f} reward={pt.reward:.2f} "
                  f"rolling={pt.rolling_mean:.2f}", file=sys.stderr)
    learner, curve = harness.train(cfg, train_days, progress=progress)
    harness.save_learner(_checkpoint(args), learner)
    harness.write_rows(os.path.join(args.out, "training_curve.csv"), curve)
    with open(os.path.join(args.out, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.dumps())
    if test_days:
        harness.write_results(args.out, harness.evaluate(cfg, learner, test_days))
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    _, test_days = harness.split_days(cfg, harness.load_days(cfg))
    learner = harness.load_learner(cfg, _checkpoint(args))
    harness.write_results(args.out, harness.evaluate(cfg, learner, test_days))
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    _, test_days = harness.split_days(cfg, harness.load_days(cfg))
    name = args.strategy or cfg.benchmark
    prefix = name.replace(":", "") + "_"
    harness.write_results(args.out, harness.run_benchmark(cfg, test_days, name), prefix)
    return 0


def _sweep_point(cfg: ExperimentConfig, eta: float) -> dict:
    point = cfg.replace(eta=eta)
    train_days, test_days = harness.split_days(point, harness.load_days(point))
    learner, _ = harness.train(point, train_days)
    return {"eta": eta, **harness.aggregate(harness.evaluate(point, learner, test_days))}


def cmd_sweep(args) -> int:
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    etas = list(cfg.sweep_etas)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, [cfg] * len(etas), etas))
    else:
        rows = [_sweep_point(cfg, eta) for eta in etas]
    harness.write_rows(os.path.join(args.out, "sweep.csv"), rows)
    return 0


def cmd_gen_data(args) -> int:
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    days = harness.load_days(cfg.replace(data_dir=""))
    for day in days:
        write_day(day, os.path.join(args.out, f"{day.instrument.symbol}_{day.date.isoformat()}.csv"))
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "bench": cmd_bench,
            "sweep": cmd_sweep, "gen-data": cmd_gen_data}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lobmm", description="Limit order book market making experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--checkpoint", help="weight checkpoint path (default <out>/weights.ckpt)")
        if name == "bench":
            sp.add_argument("--strategy", help="fixed:<1-5>, random, mmmw or ftl")
        if name == "sweep":
            sp.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
        if name == "train":
            sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (LobError, OSError) as e:
        print(f"lobmm {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
