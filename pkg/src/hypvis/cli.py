"""Command line entry point: ``hypvis <subcommand> [--config f.json] [--set key=value ...]``."""

from __future__ import annotations

import argparse
import json
import sys

from .analytic import NumericalError
from .config import ConfigError, ExperimentConfig
from .harness import RUNNERS, analytic_alpha
from .selftest import selftest

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_SELFTEST = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypvis", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set model.lambda=0.2 (repeatable)")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("alpha", parents=[common], help="analytic alpha of the configured model")
    for name in RUNNERS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    sub.add_parser("selftest", parents=[common], help="built-in oracle checks")
    return p


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg.apply_override(key.strip(), value.strip())
    return cfg


def _run(args) -> int:
    if args.command == "selftest":
        checks = selftest()
        for c in checks:
            if not args.quiet or not c.ok:
                print(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}")
        return EXIT_OK if all(c.ok for c in checks) else EXIT_SELFTEST
    cfg = load_config(args)
    if args.command == "alpha":
        cfg.validate()
        a = analytic_alpha(cfg)
        if a is None:
            raise ConfigError("no analytic alpha for the occupied phase with random radii")
        if not args.quiet:
            print(json.dumps({"alpha": a.value, "tolerance": a.tolerance,
                              "provenance": a.provenance}))
        return EXIT_OK
    result = RUNNERS[args.command](cfg)
    paths = result.write()
    if not args.quiet:
        print(json.dumps(result.summary, default=float))
        print(f"wrote {paths['rows']}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
