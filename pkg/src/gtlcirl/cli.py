"""Command-line interface.

Subcommands:
  run      -- execute one training run from a configuration file
  sweep    -- fan a configuration out across seeds (and methods)
  monitor  -- offline robustness check of a formula against a trace file
  version  -- print the package version
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import METHODS, load_config
from .graphs import GraphTrajectory
from .harness import emit_results, run, sweep
from .parsing import parse_formula
from .robustness import any_node_robustness, robustness


def _parse_seed_range(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x]


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.episodes is not None:
        cfg = replace(cfg, episodes=args.episodes, rl=replace(cfg.rl, episodes=args.episodes))
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if args.method is not None:
        cfg = replace(cfg, method=args.method)
    if args.no_figures:
        cfg = replace(cfg, figures=False)
    cfg.validate()
    record = run(cfg)
    written = emit_results(record, cfg.out_dir)
    print(f"method={cfg.method} environment={cfg.environment} seed={cfg.seed}")
    print(f"success_rate={record.success_rate:.6f} final50={record.final_window_success():.6f}")
    if record.mined_formula is not None:
        print(f"mined_formula={record.mined_formula}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    if args.episodes is not None:
        cfg = replace(cfg, episodes=args.episodes, rl=replace(cfg.rl, episodes=args.episodes))
    if args.no_figures:
        cfg = replace(cfg, figures=False)
    seeds = _parse_seed_range(args.seeds)
    methods = args.methods.split(",") if args.methods else None
    if methods:
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            print(f"unknown methods: {unknown}", file=sys.stderr)
            return 2
    summaries, _ = sweep(cfg, seeds, methods, cfg.out_dir)
    for s in summaries:
        print(
            f"{s.method}: mean_success={s.mean_success:.6f} (+/-{s.std_success:.6f}) "
            f"final50={s.mean_final:.6f} (+/-{s.std_final:.6f})"
        )
    print(f"wrote {Path(cfg.out_dir) / 'summary.csv'}")
    return 0


def _cmd_monitor(args: argparse.Namespace) -> int:
    formula = parse_formula(Path(args.formula).read_text().strip())
    trace = GraphTrajectory.from_text(Path(args.trace).read_text())
    if args.node is not None:
        value = robustness(trace, formula, args.node, args.time)
    else:
        value = any_node_robustness(trace, formula, args.time)
    print(f"robustness={value:.6f} satisfied={'true' if value > 0 else 'false'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gtlcirl",
        description="Joint policy learning and causal GTL specification mining.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one training run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--episodes", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--method", choices=METHODS)
    p_run.add_argument("--no-figures", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a seed sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seeds", required=True, help="range a..b or comma list")
    p_sweep.add_argument("--methods", help="comma-separated subset of methods")
    p_sweep.add_argument("--episodes", type=int)
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--no-figures", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_monitor = sub.add_parser("monitor", help="offline robustness check")
    p_monitor.add_argument("--formula", required=True)
    p_monitor.add_argument("--trace", required=True)
    p_monitor.add_argument("--node", type=int)
    p_monitor.add_argument("--time", type=int, default=0)
    p_monitor.set_defaults(func=_cmd_monitor)

    p_version = sub.add_parser("version", help="print the package version")
    p_version.set_defaults(func=lambda args: (print(__version__), 0)[1])

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
