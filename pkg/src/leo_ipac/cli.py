"""Command-line interface: one subcommand per experiment.

Exit codes: 0 success, 1 validation/configuration error, 2 runtime or
numerical error.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SingularInformationError
from .runner import EXPERIMENTS, run_experiment
from .scenario import Scenario, load_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leo-ipac",
        description="LEO integrated positioning and communication simulator",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--scenario", help="scenario file (key = value lines)")
        p.add_argument("--out", default="out", help="output directory for CSV files")
        p.add_argument("--seed", type=int, help="override the scenario master seed")
        p.add_argument("--trials", type=int, help="override the scenario trial count")
        p.add_argument("--workers", type=int, default=1, help="parallel workers")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario) if args.scenario else Scenario()
        paths = run_experiment(
            args.experiment,
            scenario,
            args.out,
            workers=args.workers,
            trials=args.trials,
            seed=args.seed,
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularInformationError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
