"""Repumper light shifts, dressed-state Monte Carlo, Raman thermometry and DSH linewidth fits."""

import argparse
import sys

from workbench.dataset import COMMANDS
from workbench.main import main

DEFAULT_DATA_SOURCE = "sample"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser()
    parser.add_argument("command", choices=COMMANDS, help="Workbench command")
    parser.add_argument(
        "-d",
        "--data_source",
        type=str,
        default=DEFAULT_DATA_SOURCE,
        help="Directory name in data/input",
    )
    parser.add_argument("--seed", type=int, default=None, help="Master seed, overrides SEED")
    parser.add_argument(
        "--threads", type=int, default=None, help="Worker threads, defaults to the CPU count"
    )
    parser.add_argument(
        "--out-dir", type=str, default=None, help="Output directory, defaults to data/output/<command>"
    )
    parser.add_argument(
        "--resume", action="store_true", help="Load finished mc-map cells from the output directory"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Override a setting of workbench/config.py, repeatable",
    )
    parser.add_argument(
        "--input", type=str, default=None, help="Spectrum or PSD CSV instead of the data-source fixture"
    )
    return parser


if __name__ == "__main__":
    arguments = build_parser().parse_args()
    try:
        code = main(
            arguments.command,
            data_source=arguments.data_source,
            overrides=arguments.overrides,
            seed=arguments.seed,
            threads=arguments.threads,
            out_dir=arguments.out_dir,
            resume=arguments.resume,
            input_path=arguments.input,
        )
    except ValueError as error:
        print(f"error: {error}", file=sys.stderr)
        code = 1
    sys.exit(code)
