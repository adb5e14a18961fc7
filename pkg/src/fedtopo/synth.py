"""Deterministic synthetic 28x28 digit corpus.

Digits are drawn as seven-segment-style stroke glyphs, then each sample is
individually distorted (rotation, anisotropic scale, shear, shift), dimmed,
and noised. The corpus is written through this package's own IDX writers
under the conventional MNIST filenames, so the rest of the pipeline cannot
tell it apart from a downloaded dataset. Useful for offline runs and tests.
"""

from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.ndimage import affine_transform

from .idx import write_idx_images, write_idx_labels

SIDE = 28

# segment endpoints on the canvas, (x, y): classic seven-segment box
_X0, _X1 = 9.0, 19.0
_Y0, _YM, _Y1 = 5.0, 14.0, 23.0
_SEGMENTS = {
    "a": ((_X0, _Y0), (_X1, _Y0)),
    "b": ((_X1, _Y0), (_X1, _YM)),
    "c": ((_X1, _YM), (_X1, _Y1)),
    "d": ((_X0, _Y1), (_X1, _Y1)),
    "e": ((_X0, _YM), (_X0, _Y1)),
    "f": ((_X0, _Y0), (_X0, _YM)),
    "g": ((_X0, _YM), (_X1, _YM)),
}
_DIGIT_SEGMENTS = {
    0: "abcdef",
    1: "bc",
    2: "abged",
    3: "abgcd",
    4: "fgbc",
    5: "afgcd",
    6: "afgcde",
    7: "abc",
    8: "abcdefg",
    9: "abcdfg",
}

_STROKE = 1.35  # half-thickness of a stroke, pixels
_SOFT = 0.9  # antialiasing falloff width, pixels


@lru_cache(maxsize=None)
def render_glyph(digit: int) -> np.ndarray:
    """Clean float32 glyph in [0, 1], no distortion."""
    ys, xs = np.mgrid[0:SIDE, 0:SIDE]
    points = np.stack([xs, ys], axis=-1).astype(np.float64)  # (28, 28, 2) as (x, y)
    canvas = np.zeros((SIDE, SIDE), dtype=np.float64)
    for name in _DIGIT_SEGMENTS[digit]:
        (ax, ay), (bx, by) = _SEGMENTS[name]
        a = np.array([ax, ay])
        ab = np.array([bx - ax, by - ay])
        t = np.clip(((points - a) @ ab) / (ab @ ab), 0.0, 1.0)
        nearest = a + t[..., np.newaxis] * ab
        dist = np.linalg.norm(points - nearest, axis=-1)
        intensity = np.clip((_STROKE + _SOFT - dist) / _SOFT, 0.0, 1.0)
        canvas = np.maximum(canvas, intensity)
    return canvas.astype(np.float32)


def _distort(glyph: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    angle = math.radians(rng.uniform(-22.0, 22.0))
    scale_x = rng.uniform(0.75, 1.2)
    scale_y = rng.uniform(0.75, 1.2)
    shear = rng.uniform(-0.22, 0.22)
    shift = rng.uniform(-2.5, 2.5, size=2)
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    rotation = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
    shear_m = np.array([[1.0, shear], [0.0, 1.0]])
    scale_m = np.diag([scale_y, scale_x])
    forward = rotation @ shear_m @ scale_m
    backward = np.linalg.inv(forward)
    center = np.array([(SIDE - 1) / 2.0, (SIDE - 1) / 2.0])
    offset = center - backward @ (center + shift)
    return affine_transform(
        glyph.astype(np.float64), backward, offset=offset, order=1, cval=0.0
    )


def make_sample(digit: int, rng: np.random.Generator) -> np.ndarray:
    """One distorted uint8 image of the given digit."""
    img = _distort(render_glyph(digit), rng)
    img *= rng.uniform(0.55, 1.0) * 255.0
    img += rng.normal(0.0, rng.uniform(8.0, 30.0), size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def generate(count: int, seed: int, start_index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Balanced (images, labels); sample i is independent of all others.

    Per-sample RNG streams derive from (seed, start_index + i), so disjoint
    index ranges (e.g. train vs test) never share augmentation noise.
    """
    labels = np.arange(count, dtype=np.int64) % 10
    images = np.empty((count, SIDE, SIDE), dtype=np.uint8)
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((seed, start_index + i)))
        images[i] = make_sample(int(labels[i]), rng)
    shuffle_seq = np.random.SeedSequence((seed, 0x5F, start_index))
    order = np.random.default_rng(shuffle_seq).permutation(count)
    return images[order], labels[order].astype(np.uint8)


def write_corpus(
    directory: str | Path,
    train_count: int = 8000,
    test_count: int = 2000,
    seed: int = 7,
) -> dict[str, Path]:
    """Write a full train/test corpus in MNIST layout; returns role -> path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train_images, train_labels = generate(train_count, seed, start_index=0)
    test_images, test_labels = generate(test_count, seed, start_index=train_count)
    paths = {
        "train_images": directory / "train-images-idx3-ubyte",
        "train_labels": directory / "train-labels-idx1-ubyte",
        "test_images": directory / "t10k-images-idx3-ubyte",
        "test_labels": directory / "t10k-labels-idx1-ubyte",
    }
    paths["train_images"].write_bytes(write_idx_images(train_images))
    paths["train_labels"].write_bytes(write_idx_labels(train_labels))
    paths["test_images"].write_bytes(write_idx_images(test_images))
    paths["test_labels"].write_bytes(write_idx_labels(test_labels))
    return paths
