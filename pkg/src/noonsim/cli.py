"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import KINDS, load_config
from .errors import ConfigError, ImpossibleBranchError, NumericalError, TruncationError
from .report import emit
from .runner import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def shipped_scenarios() -> List[Path]:
    root = resources.files("noonsim") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml"))


def _default_for_kind(kind: str) -> Path:
    for path in shipped_scenarios():
        if load_config(path).kind == kind:
            return path
    raise ConfigError(f"no shipped scenario of kind {kind!r}")


def _run(config_path, seed, out, fmt, timestamp=True) -> int:
    try:
        cfg = load_config(config_path)
    except (ValidationError, ConfigError) as exc:
        print(f"invalid config {config_path}:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = fmt or cfg.output.format
    out = out if out is not None else cfg.output.path
    try:
        report = run_scenario(cfg, seed=seed, timestamp=timestamp)
    except (ConfigError, ValueError) as exc:
        print(f"{config_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, TruncationError, ImpossibleBranchError) as exc:
        print(f"{config_path}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = emit(report, fmt, out)
    if out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="seed for sampled measurements and random draws")
    p.add_argument("--out", default=None, help="output path (default: stdout or the config's output.path)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--no-timestamp", action="store_true", help="omit the wall-clock timestamp from JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noonsim", description="Exact simulation of N00N-state protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("config")
    _add_run_options(run)

    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("config")

    sub.add_parser("list-scenarios", help="list the shipped scenario files")

    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} scenario (default: the shipped one)")
        p.add_argument("config", nargs="?", default=None)
        _add_run_options(p)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for path in shipped_scenarios():
            cfg = load_config(path)
            print(f"{path.name:32s} {cfg.kind:20s} {cfg.description}")
        return EXIT_OK
    if args.command == "validate":
        try:
            cfg = load_config(args.config)
        except (ValidationError, ConfigError) as exc:
            print(f"invalid config {args.config}:\n{exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{args.config}: valid {cfg.kind} scenario")
        return EXIT_OK
    if args.command == "run":
        path = args.config
    else:
        path = args.config
        if path is None:
            path = _default_for_kind(args.command)
        else:
            try:
                kind = load_config(path).kind
            except (ValidationError, ConfigError) as exc:
                print(f"invalid config {path}:\n{exc}", file=sys.stderr)
                return EXIT_CONFIG
            if kind != args.command:
                print(f"{path}: scenario kind {kind!r} does not match subcommand {args.command!r}", file=sys.stderr)
                return EXIT_CONFIG
    return _run(path, args.seed, args.out, args.format, timestamp=not args.no_timestamp)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
