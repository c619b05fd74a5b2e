"""Command line: ``nonlocal-optics run|validate|list-experiments``."""

from __future__ import annotations

import argparse
import os
import sys

from ..errors import NonlocalOpticsError
from .config import EXPERIMENTS, ConfigError, parse_config, serialize_config
from .experiments import run_experiment
from .io import write_outputs

OUT_ENV = "NONLOCAL_OPTICS_OUT"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-optics", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write CSV/JSON outputs")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help=f"output directory (overrides config and ${OUT_ENV})")
    run.add_argument("--seed", type=_seed, help="random seed (overrides config)")
    val = sub.add_parser("validate", help="check a config and print it fully resolved")
    val.add_argument("--config", required=True)
    sub.add_parser("list-experiments", help="list registered experiment names")
    return p


def output_directory(cli_out, cfg) -> str:
    return cli_out or cfg.output_dir or os.environ.get(OUT_ENV) or "results"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-experiments":
        for name, exp in EXPERIMENTS.items():
            print(f"{name}\t{exp['description']}")
        return EXIT_OK
    try:
        cfg = _load(args.config)
        if args.command == "validate":
            print(serialize_config(cfg))
            return EXIT_OK
        if args.seed is not None:
            cfg.seed = args.seed
        results = run_experiment(cfg)
        out = output_directory(args.out, cfg)
        manifest = write_outputs(results, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonlocalOpticsError as exc:
        print(f"numerical validity failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    for entry in manifest["files"]:
        print(os.path.join(out, entry["file"]))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
