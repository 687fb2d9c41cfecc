"""Command-line interface.

Exit codes: 0 all suites passed (skips allowed), 1 suite failure,
2 invalid configuration, 3 fixture construction failure.  The environment
variable GAUSSMAPS_OUT overrides the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import catalog
from .report import (
    ConfigError, FixtureBuildError, run, validate_config, write_report,
)

EXIT_SUITE_FAILURE = 1
EXIT_CONFIG = 2
EXIT_FIXTURE = 3


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    except json.JSONDecodeError as err:
        print(f"error: malformed JSON at line {err.lineno}, column {err.colno}: "
              f"{err.msg}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def cmd_run(args):
    config = _load_config(args.config)
    if args.seed is not None:
        config.setdefault("numeric", {})["seed"] = args.seed
    if args.fd_step is not None:
        config.setdefault("numeric", {})["fd_step"] = args.fd_step
    outdir = (args.out or os.environ.get("GAUSSMAPS_OUT")
              or config.get("output", {}).get("directory") or "out")
    config.setdefault("output", {})["directory"] = outdir
    try:
        report, timings = run(config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FixtureBuildError as err:
        print(f"error: fixture construction failed: {err}", file=sys.stderr)
        return EXIT_FIXTURE
    paths = write_report(report, timings, outdir)
    for suite in report["suites"]:
        line = f"{suite['name']}: {suite['status']}"
        if suite["reason"]:
            line += f" ({suite['reason']})"
        stats = suite["stats"]
        if "max_residual" in stats:
            line += f"  max={stats['max_residual']:.3e}"
        print(line)
    print(f"report: {paths[0]}")
    return 0 if report["overall_pass"] else EXIT_SUITE_FAILURE


def cmd_validate(args):
    config = _load_config(args.config)
    try:
        validate_config(config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print("configuration valid")
    return 0


def cmd_list_fixtures(args):
    for name in catalog.fixture_names():
        _, params = catalog.REGISTRY[name]
        print(f"{name}: {params}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gaussmaps",
        description="Verification suites for spherical and geodesic Gauss "
                    "maps of sphere immersions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run suites from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="output directory (overrides config; "
                                     "GAUSSMAPS_OUT overrides both)")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--fd-step", type=float, dest="fd_step")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="schema-validate a config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_list = sub.add_parser("list-fixtures", help="list catalog fixtures")
    p_list.set_defaults(func=cmd_list_fixtures)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
