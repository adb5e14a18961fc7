#!/usr/bin/env python3
"""Write a synthetic digit corpus as IDX files with the standard MNIST names.

Useful when no real MNIST/Fashion-MNIST files are on disk: the corpus is a
deterministic function of the seed, so runs stay reproducible end to end.

    python3 scripts/make_synthetic_data.py --out data --train 8000 --test 2000
"""

import argparse
from pathlib import Path

from fedtopo.synth import write_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data", help="output directory")
    parser.add_argument("--train", type=int, default=8000, help="training samples")
    parser.add_argument("--test", type=int, default=2000, help="test samples")
    parser.add_argument("--seed", type=int, default=7, help="corpus seed")
    args = parser.parse_args()

    paths = write_corpus(
        Path(args.out), train_count=args.train, test_count=args.test, seed=args.seed
    )
    for role in ("train_images", "train_labels", "test_images", "test_labels"):
        path = paths[role]
        print(f"{role:13s} {path} ({path.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
