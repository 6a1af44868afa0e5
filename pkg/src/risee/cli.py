"""Command-line entry point: run experiments, self-check, emit default config."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import ExperimentConfig, run_experiment, summarize
from .scenario import default_scenario


def _default_config_dict() -> dict:
    sc = default_scenario()
    return {
        "scenario": sc.to_dict(),
        "methods": [
            {"method": "approach1", "objective": "gee", "reflection_constraint": "global"},
            {"method": "approach2", "objective": "gee", "reflection_constraint": "global"},
            {"method": "approach1", "objective": "sum_rate", "reflection_constraint": "global"},
            {"method": "approach2", "objective": "sum_rate", "reflection_constraint": "global"},
            {"method": "uniform_random", "objective": "gee", "reflection_constraint": "global"},
        ],
        "sweep": {"variable": "Pmax_dbm", "values": [-10.0, 0.0, 10.0, 20.0, 30.0]},
        "drops": 100,
        "base_seed": 12345,
        "output_path": "results.csv",
        "threads": 1,
    }


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="risee",
                                 description="RIS-aided uplink energy-efficiency simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment from a JSON config")
    run.add_argument("config", help="path to the experiment JSON file")
    run.add_argument("--seed", type=int, default=None, help="override base seed")
    run.add_argument("--drops", type=int, default=None, help="override drop count")
    run.add_argument("--out", default=None, help="override output CSV path")
    run.add_argument("--threads", type=int, default=None, help="worker count (default 1)")

    sub.add_parser("check", help="run the built-in invariant/oracle self-tests")
    sub.add_parser("sweep-defaults", help="print the default experiment config as JSON")
    return ap


def cli(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "sweep-defaults":
        print(json.dumps(_default_config_dict(), indent=2))
        return 0

    if args.command == "check":
        from .selfcheck import run_selfcheck
        return 0 if run_selfcheck() else 2

    try:
        config = ExperimentConfig.from_json(args.config)
        if args.seed is not None:
            config.base_seed = args.seed
        if args.drops is not None:
            config.drops = args.drops
        if args.out is not None:
            config.output_path = args.out
        if args.threads is not None:
            config.threads = args.threads
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        records = run_experiment(config)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    for row in summarize(records):
        print(row)
    if config.output_path:
        print(f"wrote {len(records)} records to {config.output_path}")
    return 0


def main():
    raise SystemExit(cli())


if __name__ == "__main__":
    main()
