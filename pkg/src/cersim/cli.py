"""Command line entry point: ``cersim <scenario> --config FILE``."""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .scenario import (SCENARIOS, ConfigError, SolverError,
                       parse_config, run_scenario)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cersim",
        description="Spontaneous and correlation-enhanced Raman scattering simulator.")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    parser.add_argument("--out", type=Path, help="output CSV (default: stdout)")
    parser.add_argument("--grid", type=int, help="cells per axis (sets n_z = n_t)")
    parser.add_argument("--sweep-points", type=int, help="number of sweep samples")
    parser.add_argument("--optimal-phase", action="store_true",
                        help="cers: evaluate the cross term at the constructive phase")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    config = parse_config(text)
    changes = {"scenario": args.scenario}
    if args.grid is not None:
        changes.update(n_z=args.grid, n_t=args.grid)
    if args.sweep_points is not None:
        changes["sweep_points"] = args.sweep_points
    if args.out is not None:
        changes["out"] = str(args.out)
    try:
        return replace(config, **changes)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_scenario(config, optimal_phase=args.optimal_phase)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.text)
    else:
        sys.stdout.write(result.text)
    if not result.passed:
        print("validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
