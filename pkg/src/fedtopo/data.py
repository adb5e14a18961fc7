"""Dataset normalization, stratified IID partitioning, and split helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CountMismatchError,
    DegenerateFractionError,
    TooManyClientsError,
)
from .idx import LabelSet, RawImageSet

NUM_CLASSES = 10


@dataclass(frozen=True)
class Dataset:
    """Normalized images in [0, 1] paired with integer class labels."""

    images: np.ndarray  # float32, shape (N, rows, cols, 1)
    labels: np.ndarray  # int64, shape (N,)
    name: str

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise CountMismatchError(
                f"{len(self.images)} images vs {len(self.labels)} labels"
            )

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.images[indices], self.labels[indices], self.name)


@dataclass(frozen=True)
class ClientShard:
    """One client's private slice of the training set (indices + count)."""

    client_id: int
    indices: np.ndarray  # int64, unique within and across shards

    @property
    def n_c(self) -> int:
        return int(self.indices.size)


def normalize(raw: RawImageSet, labels: LabelSet, name: str) -> Dataset:
    """Scale uint8 pixels to [0, 1] float32 and attach labels."""
    if raw.count != labels.count:
        raise CountMismatchError(
            f"{raw.count} images vs {labels.count} labels in {name}"
        )
    images = (raw.pixels.astype(np.float32) / 255.0)[..., np.newaxis]
    return Dataset(images=images, labels=labels.labels.astype(np.int64), name=name)


def _indices_by_class(labels: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(labels == k) for k in range(NUM_CLASSES)]


def partition_iid(dataset: Dataset, num_clients: int, seed: int) -> list[ClientShard]:
    """Stratified IID partition: per-class shuffle, then continuous round-robin deal.

    The deal cursor runs over classes without resetting, so both the per-class
    counts and the shard totals differ by at most one across clients.
    """
    if num_clients < 1:
        raise TooManyClientsError("need at least one client")
    n = len(dataset)
    if num_clients > n:
        raise TooManyClientsError(f"{num_clients} clients but only {n} samples")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(num_clients)]
    cursor = 0
    for class_indices in _indices_by_class(dataset.labels):
        for idx in rng.permutation(class_indices):
            buckets[cursor % num_clients].append(int(idx))
            cursor += 1
    return [
        ClientShard(client_id=cid, indices=np.sort(np.asarray(bucket, dtype=np.int64)))
        for cid, bucket in enumerate(buckets)
    ]


def _largest_remainder_allocation(class_counts: np.ndarray, total: int) -> np.ndarray:
    """Split ``total`` across classes proportionally to ``class_counts``."""
    n = int(class_counts.sum())
    quotas = class_counts * (total / n)
    alloc = np.floor(quotas).astype(np.int64)
    alloc = np.minimum(alloc, class_counts)
    shortfall = total - int(alloc.sum())
    if shortfall > 0:
        remainders = quotas - np.floor(quotas)
        headroom = class_counts - alloc
        # hand out leftovers to the largest remainders first; ties go to the
        # lower class index so the allocation is deterministic
        order = np.lexsort((np.arange(len(class_counts)), -remainders))
        for k in order:
            if shortfall == 0:
                break
            if headroom[k] > 0:
                alloc[k] += 1
                shortfall -= 1
    return alloc


def split_validation(
    dataset: Dataset, fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Stratified train/validation split; ``fraction`` goes to validation."""
    n = len(dataset)
    if not 0.0 < fraction < 1.0:
        raise DegenerateFractionError(f"fraction must lie in (0, 1), got {fraction}")
    val_total = int(np.floor(n * fraction + 0.5))
    if val_total < 1 or val_total >= n:
        raise DegenerateFractionError(
            f"fraction {fraction} of {n} samples leaves an empty side"
        )
    rng = np.random.default_rng(seed)
    class_counts = np.bincount(dataset.labels, minlength=NUM_CLASSES)
    per_class = _largest_remainder_allocation(class_counts, val_total)
    val_parts = []
    for k, class_indices in enumerate(_indices_by_class(dataset.labels)):
        shuffled = rng.permutation(class_indices)
        val_parts.append(shuffled[: per_class[k]])
    val_indices = np.sort(np.concatenate(val_parts)).astype(np.int64)
    mask = np.ones(n, dtype=bool)
    mask[val_indices] = False
    train_indices = np.flatnonzero(mask)
    return dataset.subset(train_indices), dataset.subset(val_indices)


def stratified_subset(dataset: Dataset, max_count: int, seed: int) -> Dataset:
    """Class-proportional random subset of at most ``max_count`` samples."""
    n = len(dataset)
    if max_count < 1:
        raise DegenerateFractionError(f"subset size must be >= 1, got {max_count}")
    if max_count >= n:
        return dataset
    rng = np.random.default_rng(seed)
    class_counts = np.bincount(dataset.labels, minlength=NUM_CLASSES)
    per_class = _largest_remainder_allocation(class_counts, max_count)
    parts = []
    for k, class_indices in enumerate(_indices_by_class(dataset.labels)):
        shuffled = rng.permutation(class_indices)
        parts.append(shuffled[: per_class[k]])
    keep = np.sort(np.concatenate(parts)).astype(np.int64)
    return dataset.subset(keep)


def shard_arrays(dataset: Dataset, shard: ClientShard) -> tuple[np.ndarray, np.ndarray]:
    """Materialize one shard's (images, labels) views for training."""
    return dataset.images[shard.indices], dataset.labels[shard.indices]
