"""Command-line entry point: ``kloostlab <command> --config run.toml``.

Exit codes: 0 success, 1 configuration error, 2 compute error under
``--strict`` (or a failing ``selftest``), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Any

from .errors import ComputeError, ConfigError
from .experiments import KINDS, ExperimentConfig, emit, load_config, run, tomllib

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("kloostlab")


def _parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kloostlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a top-level config key (TOML value syntax)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "jsonl"), default=None)
    common.add_argument("--seed", type=int, default=None, help="default PRNG seed (u64)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--strict", action="store_true", help="abort on the first failed point")
    common.add_argument("--resume", action="store_true",
                        help="skip grid points already present in --out")
    for kind in KINDS:
        sub.add_parser(kind, parents=[common], help=f"run a {kind} experiment")
    sub.add_parser("selftest", help="run quick built-in consistency checks")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    overrides = dict(_parse_override(s) for s in args.set)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        overrides["seed"] = args.seed
    if args.config:
        return load_config(args.config, overrides, kind=args.command)
    overrides.setdefault("kind", args.command)
    if overrides["kind"] != args.command:
        raise ConfigError("kind override does not match the command")
    return ExperimentConfig.from_dict(overrides)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("KLOOSTLAB_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        from .selftest import run_selftest

        return EXIT_OK if run_selftest() else EXIT_COMPUTE
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _config_from_args(args)
        fmt = args.format or cfg.output.get("format", "csv")
        if args.resume and not (args.out or cfg.output.get("path")):
            raise ConfigError("--resume needs an output file")
        rows = run(cfg, out=args.out, fmt=fmt, threads=args.threads,
                   strict=args.strict, resume=args.resume)
        if not (args.out or cfg.output.get("path")):
            sys.stdout.write(emit(rows, fmt))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputeError as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
