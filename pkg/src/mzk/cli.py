"""``mzk <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--set key=value ...]``.

Exit status: 0 when every assertion in the config passes, 1 when an
assertion fails, 2 for configuration errors, 3 when the computation itself
fails.  Failures are also printed to stderr as one JSON document.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import SUBCOMMANDS, parse_config
from .errors import ConfigurationError, MZKError
from .experiments import run
from .report import emit_plot_data, write_report

OUTPUT_ROOT_ENV = "MZK_OUTPUT_ROOT"

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2, 3


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="mzk", description="mZK simulation and verification experiments")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", help="output directory (default: $MZK_OUTPUT_ROOT/<subcommand> or ./mzk-out/<subcommand>)")
    p.add_argument("--seed", type=_u64, help="overrides the config seed")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. --set solver.t_end=0.5 (repeatable)")
    p.add_argument("--log-level", default="WARNING")
    return p


def default_out(subcommand, cfg_dir=None):
    if cfg_dir:
        return cfg_dir
    root = os.environ.get(OUTPUT_ROOT_ENV) or "mzk-out"
    return os.path.join(root, subcommand)


def _fail(kind, items, code):
    print(json.dumps({"status": kind, "failures": items}, indent=1), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        return _fail("config_error", [f"cannot read config: {exc}"], EXIT_CONFIG)
    try:
        cfg = parse_config(text, args.subcommand, args.overrides, args.seed)
    except ConfigurationError as exc:
        return _fail("config_error", exc.errors, EXIT_CONFIG)
    out = args.out or default_out(args.subcommand, cfg["output"]["dir"])
    try:
        rep = run(cfg, out)
    except ConfigurationError as exc:
        return _fail("config_error", exc.errors, EXIT_CONFIG)
    except MZKError as exc:
        return _fail("run_error", [f"{type(exc).__name__}: {exc}"], EXIT_FAILURE)
    write_report(rep, out)
    emit_plot_data(rep, os.path.join(out, "series"))
    failed = [a for a in rep.assertions if not a["passed"]]
    print(f"{rep.experiment}: {rep.status} ({len(rep.assertions) - len(failed)}/{len(rep.assertions)} "
          f"assertions) -> {os.path.join(out, 'report.json')}")
    if failed:
        return _fail("assertion_failed", failed, EXIT_ASSERT)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
