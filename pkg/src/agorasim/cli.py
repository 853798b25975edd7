"""Command-line interface.

Subcommands: run, analyze, compare-baselines, gen-profiles, replay.  Chat
backend credentials are read from the AGORASIM_API_KEY environment variable
only; they never appear in config files or flags.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import rng as rngmod
from .agents.personas import (assign_strategies_and_capital,
                              generate_personas, save_personas)
from .errors import AgoraError
from .sim.compare import compare_baselines, render_table
from .sim.config import DEFAULT_INDUSTRIES, SimConfig, load_config
from .sim.replay import replay_run
from .sim.runner import run_simulation


def _load_or_default(args) -> SimConfig:
    config = load_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.scenario is not None:
        config.scenario = args.scenario
    if args.policy_mode is not None:
        config.policy_mode = args.policy_mode
    if args.output is not None:
        config.paths.output = args.output
    return config


def cmd_run(args) -> int:
    config = _load_or_default(args)
    outdir = run_simulation(config)
    print(f"run complete: {outdir}")
    return 0


def cmd_analyze(args) -> int:
    reports = replay_run(args.run_dir)
    print(json.dumps(reports, indent=2, sort_keys=True))
    return 0


def cmd_replay(args) -> int:
    reports = replay_run(args.run_dir)
    with open(f"{args.run_dir}/reports.json") as fh:
        stored = json.load(fh)
    if reports == stored:
        print("replay OK: reports reproduced exactly")
        return 0
    print("replay MISMATCH: recomputed reports differ from stored reports")
    return 1


def cmd_compare(args) -> int:
    engine_reports = replay_run(args.run_dir) if args.run_dir else None
    table = compare_baselines(seeds=range(args.seeds), horizon=args.horizon,
                              reference_path=args.reference,
                              engine_reports=engine_reports)
    print(render_table(table))
    return 0


def cmd_gen_profiles(args) -> int:
    rng = rngmod.stream(args.seed, "personas")
    personas, rank = generate_personas(args.count, list(args.industries), rng)
    personas = assign_strategies_and_capital(personas, rank)
    save_personas(personas, args.output)
    print(f"wrote {len(personas)} personas to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agorasim",
        description="Agent-based stock market simulator")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation")
    run.add_argument("--config", help="YAML config path")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--scenario", choices=("control", "rumor"))
    run.add_argument("--policy-mode", dest="policy_mode",
                     choices=("rules", "llm", "mixed"))
    run.add_argument("--output", help="run directory")
    run.set_defaults(func=cmd_run)

    analyze = sub.add_parser("analyze",
                             help="recompute metrics from a run's event log")
    analyze.add_argument("run_dir")
    analyze.set_defaults(func=cmd_analyze)

    replay = sub.add_parser(
        "replay", help="verify stored reports against the event log")
    replay.add_argument("run_dir")
    replay.set_defaults(func=cmd_replay)

    compare = sub.add_parser("compare-baselines",
                             help="stylized-facts table across systems")
    compare.add_argument("--seeds", type=int, default=10)
    compare.add_argument("--horizon", type=int, default=2000)
    compare.add_argument("--reference", help="reference market CSV")
    compare.add_argument("--run-dir", dest="run_dir",
                         help="include an engine row from this run")
    compare.set_defaults(func=cmd_compare)

    gen = sub.add_parser("gen-profiles",
                         help="synthesize personas and initial records")
    gen.add_argument("--count", type=int, default=100)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--industries", nargs="+",
                     default=list(DEFAULT_INDUSTRIES))
    gen.add_argument("--output", default="personas.jsonl")
    gen.set_defaults(func=cmd_gen_profiles)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AgoraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
