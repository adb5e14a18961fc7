"""ParamSet: the ordered, named parameter collection exchanged between clients.

Also provides the flat binary checkpoint format:

    8-byte architecture fingerprint
    uint32 LE entry count
    per entry: uint16 LE name length, name bytes (utf-8),
               uint8 ndim, ndim * uint32 LE extents,
               float32 LE values, row-major
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import StructureMismatchError, TruncatedPayloadError

FINGERPRINT_BYTES = 8


class ParamSet:
    """Ordered mapping of entry name -> numeric array.

    Instances are structurally typed: two ParamSets with equal names, shapes,
    and dtypes in the same order can be combined elementwise. No operation in
    this package mutates a ParamSet it receives.
    """

    __slots__ = ("_names", "_arrays")

    def __init__(self, entries: Iterable[tuple[str, np.ndarray]]):
        names = []
        arrays = []
        for name, arr in entries:
            names.append(str(name))
            arrays.append(np.asarray(arr))
        if len(set(names)) != len(names):
            raise StructureMismatchError("duplicate entry names in ParamSet")
        self._names = tuple(names)
        self._arrays = tuple(arrays)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(zip(self._names, self._arrays))

    def arrays(self) -> tuple[np.ndarray, ...]:
        return self._arrays

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._arrays[self._names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __len__(self) -> int:
        return len(self._names)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}{list(a.shape)}" for n, a in self.items())
        return f"ParamSet({inner})"

    def num_values(self) -> int:
        return int(sum(a.size for a in self._arrays))

    def copy(self) -> "ParamSet":
        return ParamSet((n, a.copy()) for n, a in self.items())

    def astype(self, dtype) -> "ParamSet":
        return ParamSet((n, a.astype(dtype)) for n, a in self.items())

    def structure(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        return tuple((n, a.shape) for n, a in self.items())

    def same_structure(self, other: "ParamSet") -> bool:
        return self.structure() == other.structure()

    def require_same_structure(self, other: "ParamSet") -> None:
        if not self.same_structure(other):
            raise StructureMismatchError(
                f"parameter structures differ: {self.structure()} vs {other.structure()}"
            )

    def allclose(self, other: "ParamSet", atol: float = 0.0, rtol: float = 0.0) -> bool:
        self.require_same_structure(other)
        return all(
            np.allclose(a, b, atol=atol, rtol=rtol)
            for a, b in zip(self._arrays, other._arrays)
        )

    def equal_bits(self, other: "ParamSet") -> bool:
        self.require_same_structure(other)
        return all(
            np.array_equal(a, b) and a.dtype == b.dtype
            for a, b in zip(self._arrays, other._arrays)
        )


def dump_params(params: ParamSet, fingerprint: bytes) -> bytes:
    if len(fingerprint) != FINGERPRINT_BYTES:
        raise ValueError(
            f"fingerprint must be {FINGERPRINT_BYTES} bytes, got {len(fingerprint)}"
        )
    out = [fingerprint, struct.pack("<I", len(params))]
    for name, arr in params.items():
        encoded = name.encode("utf-8")
        out.append(struct.pack("<H", len(encoded)))
        out.append(encoded)
        out.append(struct.pack("<B", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(out)


def load_params(raw: bytes) -> tuple[bytes, ParamSet]:
    view = memoryview(raw)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise TruncatedPayloadError(
                f"checkpoint truncated at byte {pos}: needed {n} more"
            )
        chunk = view[pos : pos + n]
        pos += n
        return chunk

    fingerprint = bytes(take(FINGERPRINT_BYTES))
    (count,) = struct.unpack("<I", take(4))
    entries = []
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape)
        entries.append((name, data.astype(np.float32)))
    if pos != len(view):
        raise TruncatedPayloadError(f"{len(view) - pos} trailing bytes in checkpoint")
    return fingerprint, ParamSet(entries)


def save_params(path: str | Path, params: ParamSet, fingerprint: bytes) -> None:
    Path(path).write_bytes(dump_params(params, fingerprint))


def read_params(path: str | Path) -> tuple[bytes, ParamSet]:
    return load_params(Path(path).read_bytes())
