"""Command-line runner: ``twistor-check <suite> [options]``.

Exit status 0 when every check passes, 1 when some check fails, 2 on usage
errors.  Reports go to stdout as JSON (or CSV) unless ``--out`` is given.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import suites
from .report import SCHEMA_VERSION, SuiteReport, to_csv, to_json


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return val


def _step(text: str) -> float:
    val = float(text)
    if not 1e-4 <= val <= 1e-1:
        raise argparse.ArgumentTypeError(f"step h must lie in [1e-4, 1e-1], got {text}")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistor-check", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--csv", action="store_true", help="emit one CSV row per check instead of JSON")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default: TWISTOR_SEED or built-in)")

    sampled = argparse.ArgumentParser(add_help=False)
    sampled.add_argument("--samples", type=_positive_int, default=50, help="chart sample points")
    sampled.add_argument("--h", type=_step, default=5e-3, help="finite-difference step")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("algebra", parents=[common], help="exact Lefschetz and Kähler algebra")
    p = sub.add_parser("commutators", parents=[common, sampled], help="Kähler commutator relations on CP^m")
    p.add_argument("--m", type=_positive_int, default=2)
    p = sub.add_parser("curvature", parents=[common, sampled], help="q(R), FD curvature, Weitzenböck")
    p.add_argument("--m", type=_positive_int, default=2)
    p = sub.add_parser("cpn", parents=[common, sampled], help="eigenfunction and twistor forms on CP^m")
    p.add_argument("--m", type=_positive_int, default=2)
    p.add_argument("--degree", type=int, default=None, help="even degree 2 <= p <= 2m-2")
    p = sub.add_parser("conformal", parents=[common, sampled], help="conformal invariance of twistor forms")
    p.add_argument("--m", type=_positive_int, default=2)
    sub.add_parser("middim", parents=[common, sampled], help="Hodge duality and the middle degree on CP^2")
    sub.add_parser("all", parents=[common, sampled], help="every suite")
    return parser


def _validate(args) -> None:
    """Reject m/p combinations that have no meaning for the chosen suite."""
    cmd = args.command
    if cmd == "commutators" and args.m < 2:
        raise ValueError("commutator relations need m >= 2")
    if cmd == "cpn":
        suites.validate_cpn_args(args.m, args.degree)
    if cmd in ("commutators", "curvature", "cpn", "conformal") and args.m > 4:
        raise ValueError("m > 4 is outside the supported range (nested stencils grow as (4n)^k)")


def _run(args) -> list[SuiteReport]:
    cmd = args.command
    if cmd == "algebra":
        return [suites.algebra_suite(seed=args.seed)]
    if cmd == "commutators":
        return [suites.commutators_suite(args.m, args.samples, args.h, args.seed)]
    if cmd == "curvature":
        return [suites.curvature_suite(args.m, args.samples, args.h, args.seed)]
    if cmd == "cpn":
        return [suites.cpn_suite(args.m, args.degree, args.samples, args.h, args.seed)]
    if cmd == "conformal":
        return [suites.conformal_suite(args.m, args.samples, args.h, args.seed)]
    if cmd == "middim":
        return [suites.middim_suite(args.samples, args.h, args.seed)]
    return suites.all_suites(args.samples, args.h, args.seed)


def _render(reports: list[SuiteReport], as_csv: bool) -> str:
    if as_csv:
        return to_csv(reports)
    if len(reports) == 1:
        return to_json(reports[0].to_dict())
    return to_json({
        "schema": SCHEMA_VERSION,
        "suite": "all",
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    })


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return int(exc.code or 0)
    try:
        _validate(args)
    except ValueError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        reports = _run(args)
    except (ValueError, ArithmeticError, FloatingPointError) as exc:
        print(f"{parser.prog} {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    text = _render(reports, args.csv)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failing = [c for r in reports for c in r.failing()]
    for c in failing:
        print(f"failed: {c.name} ({c.max_residual:.3e} > {c.tolerance:.1e})", file=sys.stderr)
    return 1 if failing else 0


if __name__ == "__main__":
    sys.exit(main())
