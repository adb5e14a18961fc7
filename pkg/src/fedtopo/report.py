"""Result emission: CSV tables, curve data, confusion matrices, SVG plots.

Output layout under the run directory:

    manifest.json
    tables/results_accuracy_time.csv
    tables/results_metrics.csv
    curves/curves.csv
    curves/train_accuracy.svg, curves/train_loss.svg
    curves/build_time.svg, curves/classification_time.svg
    confusion/confusion_<paradigm>.csv, confusion/confusion_<paradigm>.svg

Everything except wall-clock cells and the manifest timestamp is a pure
function of (config, seed), so repeat runs emit byte-identical files.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, MissingDataError
from .experiment import ResultsBundle
from .svg import bar_chart, heatmap, line_chart

ACCURACY_TIME_HEADER = (
    "environment,dataset,training_acc,testing_acc,build_time_s,classification_time_s"
)
METRICS_HEADER = "environment,dataset,precision,recall,f1,accuracy"
CURVES_HEADER = "round,paradigm,train_acc,train_loss,test_acc"


def _require_results(bundle: ResultsBundle) -> None:
    if not bundle.results:
        raise EmptyInputError("bundle holds no paradigm results")


def _write_rows(path: Path, header: str, rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header.split(","))
        writer.writerows(rows)


def emit_tables(bundle: ResultsBundle, out_dir: str | Path) -> list[Path]:
    _require_results(bundle)
    tables = Path(out_dir) / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    dataset = bundle.config.dataset
    acc_rows, metric_rows = [], []
    for result in bundle.results:
        env = result.paradigm.upper()
        last_round = result.round_logs[-1]
        metrics = result.metrics
        acc_rows.append(
            [
                env,
                dataset,
                f"{last_round.train_accuracy:.2f}",
                f"{metrics.accuracy:.2f}",
                f"{metrics.build_time_s:.2f}",
                f"{metrics.classification_time_s:.2f}",
            ]
        )
        metric_rows.append(
            [
                env,
                dataset,
                f"{metrics.macro_precision:.2f}",
                f"{metrics.macro_recall:.2f}",
                f"{metrics.macro_f1:.2f}",
                f"{metrics.accuracy:.2f}",
            ]
        )
    acc_path = tables / "results_accuracy_time.csv"
    metrics_path = tables / "results_metrics.csv"
    _write_rows(acc_path, ACCURACY_TIME_HEADER, acc_rows)
    _write_rows(metrics_path, METRICS_HEADER, metric_rows)
    return [acc_path, metrics_path]


def emit_curves_and_plots(bundle: ResultsBundle, out_dir: str | Path) -> list[Path]:
    _require_results(bundle)
    curves_dir = Path(out_dir) / "curves"
    curves_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    acc_series: dict[str, list[tuple[float, float]]] = {}
    loss_series: dict[str, list[tuple[float, float]]] = {}
    for result in bundle.results:
        acc_pts, loss_pts = [], []
        for log in result.round_logs:
            rows.append(
                [
                    str(log.round_index),
                    log.paradigm,
                    f"{log.train_accuracy:.6f}",
                    f"{log.train_loss:.6f}",
                    f"{log.test_accuracy:.6f}",
                ]
            )
            acc_pts.append((float(log.round_index), log.train_accuracy))
            loss_pts.append((float(log.round_index), log.train_loss))
        acc_series[result.paradigm.upper()] = acc_pts
        loss_series[result.paradigm.upper()] = loss_pts
    csv_path = curves_dir / "curves.csv"
    _write_rows(csv_path, CURVES_HEADER, rows)

    written = [csv_path]
    charts = {
        "train_accuracy.svg": line_chart(
            acc_series, "Training accuracy by round", "round", "accuracy"
        ),
        "train_loss.svg": line_chart(
            loss_series, "Training loss by round", "round", "loss"
        ),
        "build_time.svg": bar_chart(
            [r.paradigm.upper() for r in bundle.results],
            [r.metrics.build_time_s for r in bundle.results],
            "Build time by paradigm",
            "seconds",
        ),
        "classification_time.svg": bar_chart(
            [r.paradigm.upper() for r in bundle.results],
            [r.metrics.classification_time_s for r in bundle.results],
            "Classification time by paradigm",
            "seconds",
        ),
    }
    for name, text in charts.items():
        path = curves_dir / name
        path.write_text(text)
        written.append(path)
    return written


def emit_confusion(bundle: ResultsBundle, out_dir: str | Path) -> list[Path]:
    _require_results(bundle)
    conf_dir = Path(out_dir) / "confusion"
    conf_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for result in bundle.results:
        counts = result.matrix.counts
        csv_path = conf_dir / f"confusion_{result.paradigm}.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in counts:
                writer.writerow([str(int(v)) for v in row])
        svg_path = conf_dir / f"confusion_{result.paradigm}.svg"
        svg_path.write_text(
            heatmap(
                counts.tolist(),
                f"Confusion matrix — {result.paradigm.upper()} on {bundle.config.dataset}",
            )
        )
        written += [csv_path, svg_path]
    return written


def write_manifest(bundle: ResultsBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config_hash": bundle.config_hash,
        "shard_hash": bundle.shard_hash,
        "init_params_hash": bundle.init_hash,
        "dataset": bundle.config.dataset,
        "paradigms": list(bundle.config.paradigms),
        "seed": bundle.config.seed,
        "train_size": bundle.train_size,
        "test_size": bundle.test_size,
        "validation_size": bundle.validation_size,
        "validation_accuracy": {
            r.paradigm: r.validation_accuracy for r in bundle.results
        },
        "data_files": {
            "train_images": bundle.config.train_images,
            "train_labels": bundle.config.train_labels,
            "test_images": bundle.config.test_images,
            "test_labels": bundle.config.test_labels,
        },
        "started_at": bundle.started_at,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def write_bundle(bundle: ResultsBundle, out_dir: str | Path) -> list[Path]:
    """Emit the complete run directory; returns every file written."""
    written = [write_manifest(bundle, out_dir)]
    written += emit_tables(bundle, out_dir)
    written += emit_curves_and_plots(bundle, out_dir)
    written += emit_confusion(bundle, out_dir)
    return written


def summarize_bundle_dir(bundle_dir: str | Path) -> str:
    """Human-readable recap of an emitted run directory (for `report`)."""
    bundle_dir = Path(bundle_dir)
    manifest_path = bundle_dir / "manifest.json"
    if not manifest_path.exists():
        raise MissingDataError(f"no manifest.json under {bundle_dir}")
    manifest = json.loads(manifest_path.read_text())
    lines = [
        f"run of {manifest['dataset']} (seed {manifest['seed']}) at {manifest['started_at']}",
        f"train/test/validation sizes: {manifest['train_size']}/"
        f"{manifest['test_size']}/{manifest['validation_size']}",
        f"config hash  {manifest['config_hash'][:16]}…",
        f"shards hash  {manifest['shard_hash'][:16]}…",
        f"init hash    {manifest['init_params_hash'][:16]}…",
        "",
    ]
    for name in ("results_accuracy_time.csv", "results_metrics.csv"):
        table_path = bundle_dir / "tables" / name
        if not table_path.exists():
            raise MissingDataError(f"missing table {table_path}")
        with open(table_path, newline="") as fh:
            table_rows = list(csv.reader(fh))
        widths = [max(len(r[i]) for r in table_rows) for i in range(len(table_rows[0]))]
        lines.append(name)
        for row in table_rows:
            lines.append("  " + "  ".join(v.ljust(w) for v, w in zip(row, widths)))
        lines.append("")
    return "\n".join(lines)
