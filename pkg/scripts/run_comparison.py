#!/usr/bin/env python3
"""Run the full three-paradigm comparison end to end.

Finds dataset files via FEDTOPO_DATA_DIR or ./data; when nothing is there it
first writes a synthetic corpus so the script works on a bare checkout:

    python3 scripts/run_comparison.py --out results [--seed N] [--rounds N]
"""

import argparse
import logging
import sys
import time
from pathlib import Path

from fedtopo.config import build_config
from fedtopo.errors import FedtopoError, MissingDataError
from fedtopo.experiment import run_experiment
from fedtopo.report import summarize_bundle_dir, write_bundle
from fedtopo.synth import write_corpus


def resolve_config(args: argparse.Namespace):
    sections = {
        "experiment": {"seed": str(args.seed), "output_dir": args.out},
        "topology": {"rounds": str(args.rounds)},
    }
    try:
        return build_config(sections, Path("."))
    except MissingDataError:
        print("no dataset files found; writing a synthetic corpus to ./data")
        paths = write_corpus(Path("data"), train_count=8000, test_count=2000, seed=7)
        sections["experiment"].update(
            {role: str(path) for role, path in paths.items()}
        )
        return build_config(sections, Path("."))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="experiment seed")
    parser.add_argument("--rounds", type=int, default=10, help="federation rounds")
    parser.add_argument("--threads", type=int, default=1, help="client training threads")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    try:
        config = resolve_config(args)
        started = time.perf_counter()
        bundle = run_experiment(config, threads=args.threads)
        write_bundle(bundle, config.output_dir)
        print(f"\nfinished in {time.perf_counter() - started:.1f}s\n")
        print(summarize_bundle_dir(config.output_dir))
    except FedtopoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
