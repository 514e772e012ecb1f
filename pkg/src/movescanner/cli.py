"""Command-line entry point.

Exit codes: 0 clean, 1 findings at or above ``--fail-on``, 2 load or parse
error, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from . import __version__
from .detectors import Severity
from .report import render_json, render_text
from .scanner import CHECK_NAMES, ScannerConfig, scan

EXIT_OK, EXIT_FINDINGS, EXIT_LOAD_ERROR, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="movescanner",
        description="Static security scanner for Move-style bytecode (.mvas text, .mvbc binary).",
    )
    p.add_argument("paths", nargs="*", metavar="path", help="module files or directories")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")
    p.add_argument("--checks", metavar="LIST", help="comma-separated checks to run (default: all)")
    p.add_argument("--no-check", metavar="NAME", action="append", default=[], help="disable one check")
    p.add_argument("--max-paths", type=int, default=None, metavar="N")
    p.add_argument("--back-edge-budget", type=int, default=None, metavar="N")
    p.add_argument("--fail-on", choices=[s.value for s in Severity], default=Severity.LOW.value, metavar="SEV")
    p.add_argument("--deterministic", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_from_args(args: argparse.Namespace) -> ScannerConfig:
    checks = set(CHECK_NAMES)
    if args.checks is not None:
        checks = {c.strip() for c in args.checks.split(",") if c.strip()}
    unknown = (checks | set(args.no_check)) - set(CHECK_NAMES)
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(sorted(unknown))}; choose from {', '.join(CHECK_NAMES)}")
    checks -= set(args.no_check)
    kwargs = {"enabled_checks": frozenset(checks), "fail_on": Severity(args.fail_on)}
    if args.max_paths is not None:
        kwargs["max_paths"] = args.max_paths
    if args.back_edge_budget is not None:
        kwargs["back_edge_budget"] = args.back_edge_budget
    try:
        return ScannerConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.paths:
            raise UsageError("at least one path is required")
        cfg = config_from_args(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"movescanner: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = scan(args.paths, cfg, deterministic=args.deterministic)
    payload = render_json(report) if args.format == "json" else render_text(report).encode("utf-8")
    if args.output:
        try:
            with open(args.output, "wb") as fh:
                fh.write(payload)
        except OSError as exc:
            print(f"movescanner: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_LOAD_ERROR
    else:
        out = getattr(sys.stdout, "buffer", None)
        if out is not None:
            out.write(payload)
        else:
            sys.stdout.write(payload.decode("utf-8"))
        sys.stdout.flush()
    for err in report.load_errors:
        print(f"movescanner: {err}", file=sys.stderr)
    return report.exit_code(cfg.fail_on)


if __name__ == "__main__":
    sys.exit(main())
