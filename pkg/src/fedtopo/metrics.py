"""Confusion-matrix metrics and wall-clock scopes.

Conventions (fixed so results are reproducible and exactly testable):

- the matrix is 10x10 with entry [true][predicted];
- per-class values are computed from exact integer counts in Python floats;
- precision of a class never predicted is 0.0, and macro precision averages
  over all 10 classes;
- classes absent from the labels are excluded from macro recall and macro F1
  (their per-class slots are reported as 0.0);
- macro means are plain sum()/len() over ascending class index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClassOutOfRangeError,
    EmptyMatrixError,
    LengthMismatchError,
    ScopeMisuseError,
)

NUM_CLASSES = 10


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # int64, shape (10, 10), [true][predicted]

    def total(self) -> int:
        return int(self.counts.sum())


def confusion(predictions, labels) -> ConfusionMatrix:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise LengthMismatchError(
            f"predictions {predictions.shape} vs labels {labels.shape}"
        )
    if predictions.size:
        lo = min(int(predictions.min()), int(labels.min()))
        hi = max(int(predictions.max()), int(labels.max()))
        if lo < 0 or hi >= NUM_CLASSES:
            raise ClassOutOfRangeError(f"class values must lie in [0, {NUM_CLASSES - 1}]")
    flat = labels * NUM_CLASSES + predictions
    counts = np.bincount(flat, minlength=NUM_CLASSES * NUM_CLASSES)
    return ConfusionMatrix(counts.reshape(NUM_CLASSES, NUM_CLASSES))


def accuracy(m: ConfusionMatrix) -> float:
    total = m.total()
    if total == 0:
        raise EmptyMatrixError("accuracy of an empty confusion matrix")
    return int(np.trace(m.counts)) / total


def precision_per_class(m: ConfusionMatrix) -> list[float]:
    values = []
    for k in range(NUM_CLASSES):
        tp = int(m.counts[k, k])
        predicted = int(m.counts[:, k].sum())
        values.append(tp / predicted if predicted > 0 else 0.0)
    return values


def macro_precision(m: ConfusionMatrix) -> float:
    per = precision_per_class(m)
    return sum(per) / len(per)


def recall_per_class(m: ConfusionMatrix) -> list[float]:
    values = []
    for k in range(NUM_CLASSES):
        tp = int(m.counts[k, k])
        actual = int(m.counts[k, :].sum())
        values.append(tp / actual if actual > 0 else 0.0)
    return values


def _present_classes(m: ConfusionMatrix) -> list[int]:
    return [k for k in range(NUM_CLASSES) if int(m.counts[k, :].sum()) > 0]


def macro_recall(m: ConfusionMatrix) -> float:
    present = _present_classes(m)
    if not present:
        raise EmptyMatrixError("macro recall of an empty confusion matrix")
    per = recall_per_class(m)
    values = [per[k] for k in present]
    return sum(values) / len(values)


def f1_per_class(m: ConfusionMatrix) -> list[float]:
    precisions = precision_per_class(m)
    recalls = recall_per_class(m)
    values = []
    for p, r in zip(precisions, recalls):
        values.append(2 * p * r / (p + r) if p + r > 0 else 0.0)
    return values


def macro_f1(m: ConfusionMatrix) -> float:
    present = _present_classes(m)
    if not present:
        raise EmptyMatrixError("macro F1 of an empty confusion matrix")
    per = f1_per_class(m)
    values = [per[k] for k in present]
    return sum(values) / len(values)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    build_time_s: float
    classification_time_s: float


def report_from_confusion(
    m: ConfusionMatrix, build_time_s: float, classification_time_s: float
) -> MetricsReport:
    return MetricsReport(
        accuracy=accuracy(m),
        macro_precision=macro_precision(m),
        macro_recall=macro_recall(m),
        macro_f1=macro_f1(m),
        per_class_precision=tuple(precision_per_class(m)),
        per_class_recall=tuple(recall_per_class(m)),
        per_class_f1=tuple(f1_per_class(m)),
        build_time_s=build_time_s,
        classification_time_s=classification_time_s,
    )


class Stopwatch:
    """Monotonic-clock scope timer. Scopes must not nest or stop twice."""

    def __init__(self, name: str = ""):
        self.name = name
        self._start: float | None = None
        self.seconds: float = 0.0

    def start(self) -> "Stopwatch":
        if self._start is not None:
            raise ScopeMisuseError(f"stopwatch {self.name!r} already running")
        self._start = time.monotonic()
        return self

    def stop(self) -> float:
        if self._start is None:
            raise ScopeMisuseError(f"stopwatch {self.name!r} stopped before start")
        self.seconds += time.monotonic() - self._start
        self._start = None
        return self.seconds

    def __enter__(self) -> "Stopwatch":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
