"""Command-line entry point.

One executable with a subcommand per scenario kind plus `run <config>`.
Exit status: 0 when every check passes, 1 when a check fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenarios import (
    SCENARIO_KINDS,
    ConfigError,
    ScenarioError,
    default_config,
    load_config,
    run_scenario,
)


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="RNG seed override")
    sub.add_argument("--order", type=int, default=None, help="jet order override")
    sub.add_argument("--tol", type=float, default=None, help="tolerance override")
    sub.add_argument(
        "--points", type=int, default=None, help="number of sample points"
    )
    sub.add_argument(
        "--report", type=Path, default=None, help="write the JSON report here"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcgeo",
        description="numerical checks for chiral geometry structures",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    run = subs.add_parser("run", help="run a scenario described by a TOML config")
    run.add_argument("config", type=Path, help="path to the scenario config")
    _add_common_flags(run)
    for kind in SCENARIO_KINDS:
        sub = subs.add_parser(kind, help=f"run the built-in {kind} scenario")
        _add_common_flags(sub)
    return parser


def _apply_overrides(cfg, args) -> None:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.order is not None:
        if args.order < 2:
            raise ConfigError("order must be an integer >= 2")
        cfg.order = args.order
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("tol must be positive")
        cfg.tol = args.tol
    if args.points is not None:
        if args.points < 0:
            raise ConfigError("points must be nonnegative")
        cfg.count = args.points
        cfg.explicit_points = None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
        else:
            cfg = default_config(args.command)
        _apply_overrides(cfg, args)
        report = run_scenario(cfg)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render_report(report)
    if args.report is not None:
        args.report.write_text(text)
        status = "pass" if report["passed"] else "FAIL"
        print(f"{report['scenario']['kind']}: {status} ({args.report})")
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
