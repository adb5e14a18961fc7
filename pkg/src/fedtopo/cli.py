"""Command-line interface.

    fedtopo run <config> [--out DIR] [--seed N] [--dataset NAME] [--threads N]
    fedtopo inspect-data <idx-file>
    fedtopo partition-preview <config> [--seed N]
    fedtopo report <bundle-dir>

Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
Dataset files not named in the config are searched under $FEDTOPO_DATA_DIR
and ./data.
"""

from __future__ import annotations

import argparse
import logging
import os
import struct
import sys

import numpy as np

from .config import DATASETS, load_config
from .errors import ConfigError, DataError, FedtopoError
from .experiment import prepare_run, run_experiment
from .idx import IMAGE_MAGIC, LABEL_MAGIC, parse_idx_images, parse_idx_labels, read_idx_bytes
from .report import summarize_bundle_dir, write_bundle

logger = logging.getLogger("fedtopo")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedtopo",
        description="Compare hierarchical, aggregated, and continual federated learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("config_path", nargs="?", default=None, metavar="CONFIG")
        p.add_argument("--config", dest="config_opt", default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    run_p = sub.add_parser("run", help="run a full paradigm comparison")
    add_config_arg(run_p)
    run_p.add_argument("--out", default=None, help="override the output directory")
    run_p.add_argument(
        "--dataset", choices=DATASETS, default=None, help="override the dataset name"
    )
    run_p.add_argument(
        "--threads", type=int, default=0, help="client training threads (0 = auto)"
    )

    inspect_p = sub.add_parser("inspect-data", help="describe one IDX file")
    inspect_p.add_argument("idx_file")

    preview_p = sub.add_parser(
        "partition-preview", help="print per-client class histograms"
    )
    add_config_arg(preview_p)

    report_p = sub.add_parser("report", help="summarize an emitted run directory")
    report_p.add_argument("bundle_dir")
    return parser


def _config_path(args: argparse.Namespace) -> str:
    if args.config_path and args.config_opt:
        raise ConfigError("give the config either positionally or via --config, not both")
    path = args.config_path or args.config_opt
    if not path:
        raise ConfigError("no config file given")
    return path


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    if getattr(args, "dataset", None):
        overrides["dataset"] = args.dataset
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    return overrides


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(_config_path(args), _overrides(args))
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    bundle = run_experiment(config, threads=threads)
    files = write_bundle(bundle, config.output_dir)
    for result in bundle.results:
        print(
            f"{result.paradigm.upper():4s} test acc {result.metrics.accuracy:.4f}  "
            f"precision {result.metrics.macro_precision:.4f}  "
            f"build {result.metrics.build_time_s:.2f}s  "
            f"classify {result.metrics.classification_time_s:.2f}s"
        )
    print(f"wrote {len(files)} files under {config.output_dir}")
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    raw = read_idx_bytes(args.idx_file)
    if len(raw) < 4:
        raise DataError(f"{args.idx_file}: too short to hold a magic number")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == IMAGE_MAGIC:
        images = parse_idx_images(raw, strict_dims=False)
        pixels = images.pixels
        print(f"{args.idx_file}: image container (magic 0x{magic:08x})")
        print(f"  count {images.count}, {images.rows}x{images.cols} pixels")
        print(
            f"  intensity min {int(pixels.min())}, max {int(pixels.max())}, "
            f"mean {float(pixels.mean()):.2f}"
        )
    elif magic == LABEL_MAGIC:
        labels = parse_idx_labels(raw)
        histogram = np.bincount(labels.labels, minlength=10)
        print(f"{args.idx_file}: label container (magic 0x{magic:08x})")
        print(f"  count {labels.count}")
        print("  class histogram " + " ".join(str(int(v)) for v in histogram))
    else:
        raise DataError(f"{args.idx_file}: unknown magic 0x{magic:08x}")
    return 0


def _cmd_preview(args: argparse.Namespace) -> int:
    config = load_config(_config_path(args), _overrides(args))
    prepared = prepare_run(config)
    labels = prepared.train.labels
    print(f"{len(prepared.shards)} clients over {len(prepared.train)} training samples")
    print("client  n_c  " + " ".join(f"c{k}" for k in range(10)))
    for shard in prepared.shards:
        histogram = np.bincount(labels[shard.indices], minlength=10)
        counts = " ".join(f"{int(v):2d}" if v < 100 else str(int(v)) for v in histogram)
        print(f"{shard.client_id:6d}  {shard.n_c:4d}  {counts}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    print(summarize_bundle_dir(args.bundle_dir))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "inspect-data": _cmd_inspect,
    "partition-preview": _cmd_preview,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except FedtopoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
