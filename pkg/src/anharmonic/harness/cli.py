"""Command-line interface.

Usage::

    anharmonic <experiment> [--config PATH] [--seed U64] [--threads K]
               [--out DIR] [--format csv|json]

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error,
3 numerical failure (non-finite results).
"""

from __future__ import annotations

import argparse
import sys

from .config import DEFAULTS, ConfigError, load_config
from .report import emit
from . import experiments


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anharmonic",
        description="Experiments on the anharmonic chain with exchange noise.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in DEFAULTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, metavar="PATH",
                       help="key=value config file (one section per experiment)")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="master seed for the replica streams")
        p.add_argument("--threads", type=int, default=None, metavar="K",
                       help="worker processes for Monte Carlo replicas")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory for the report")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default=None, help="report serialization format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("seed", "threads", "out", "fmt")}
    try:
        cfg = load_config(args.experiment, args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        report = experiments.run(cfg)
    except (FloatingPointError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if report.has_nan:
        print("numerical failure: non-finite values in report", file=sys.stderr)
        return 3

    path = emit(report, cfg.out, cfg.fmt)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"{status} {report.experiment}:{check.name}"
        if check.detail:
            line += f"  [{check.detail}]"
        print(line)
    print(f"report written to {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
