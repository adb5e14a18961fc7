"""Bit-exact reader/writer for the IDX container used by MNIST-family files.

Layout (all integers big-endian 32-bit):

    images: magic 0x00000803, count, rows, cols, then count*rows*cols
            unsigned payload bytes in row-major order
    labels: magic 0x00000801, count, then count unsigned payload bytes

Files on disk may additionally be gzip-compressed; ``read_idx_bytes``
transparently decompresses when it sees the gzip magic.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchError,
    LabelOutOfRangeError,
    MissingDataError,
    TruncatedPayloadError,
    WrongMagicError,
)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

_GZIP_MAGIC = b"\x1f\x8b"


@dataclass(frozen=True)
class RawImageSet:
    """Unnormalized image payload exactly as stored in the container."""

    count: int
    rows: int
    cols: int
    pixels: np.ndarray  # uint8, shape (count, rows, cols)

    def __post_init__(self):
        if self.pixels.shape != (self.count, self.rows, self.cols):
            raise DimensionMismatchError(
                f"pixel block shape {self.pixels.shape} does not match "
                f"header ({self.count}, {self.rows}, {self.cols})"
            )


@dataclass(frozen=True)
class LabelSet:
    count: int
    labels: np.ndarray  # uint8, shape (count,), values in [0, 9]

    def __post_init__(self):
        if self.labels.shape != (self.count,):
            raise DimensionMismatchError(
                f"label block length {self.labels.shape} does not match header count {self.count}"
            )


def parse_idx_images(raw: bytes, strict_dims: bool = True) -> RawImageSet:
    """Parse an image container. ``strict_dims`` enforces 28x28 geometry."""
    if len(raw) < 16:
        raise TruncatedPayloadError(f"image header needs 16 bytes, got {len(raw)}")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IMAGE_MAGIC:
        raise WrongMagicError(
            f"expected image magic 0x{IMAGE_MAGIC:08x}, got 0x{magic:08x}"
        )
    expected = 16 + count * rows * cols
    if len(raw) != expected:
        raise TruncatedPayloadError(
            f"image payload: expected {expected} total bytes, got {len(raw)}"
        )
    if strict_dims and (rows, cols) != (28, 28):
        raise DimensionMismatchError(f"expected 28x28 images, got {rows}x{cols}")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, rows, cols)
    return RawImageSet(count=count, rows=rows, cols=cols, pixels=pixels)


def parse_idx_labels(raw: bytes) -> LabelSet:
    if len(raw) < 8:
        raise TruncatedPayloadError(f"label header needs 8 bytes, got {len(raw)}")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != LABEL_MAGIC:
        raise WrongMagicError(
            f"expected label magic 0x{LABEL_MAGIC:08x}, got 0x{magic:08x}"
        )
    if len(raw) != 8 + count:
        raise TruncatedPayloadError(
            f"label payload: expected {8 + count} total bytes, got {len(raw)}"
        )
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if labels.size and labels.max() > 9:
        bad = int(labels.max())
        raise LabelOutOfRangeError(f"label value {bad} outside [0, 9]")
    return LabelSet(count=count, labels=labels)


def write_idx_images(pixels: np.ndarray) -> bytes:
    """Serialize a (count, rows, cols) uint8 array into container bytes."""
    if pixels.ndim != 3:
        raise DimensionMismatchError(f"expected 3-d pixel array, got ndim={pixels.ndim}")
    count, rows, cols = pixels.shape
    header = struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols)
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def write_idx_labels(labels: np.ndarray) -> bytes:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionMismatchError(f"expected 1-d label array, got ndim={labels.ndim}")
    if labels.size and (labels.min() < 0 or labels.max() > 9):
        raise LabelOutOfRangeError("labels must lie in [0, 9]")
    header = struct.pack(">II", LABEL_MAGIC, labels.size)
    return header + np.ascontiguousarray(labels, dtype=np.uint8).tobytes()


def read_idx_bytes(path: str | Path) -> bytes:
    """Read a container file, decompressing if the file is gzip-wrapped."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError as exc:
        raise MissingDataError(f"no such data file: {path}") from exc
    except OSError as exc:
        raise MissingDataError(f"cannot read data file {path}: {exc}") from exc
    if raw[:2] == _GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw
