"""MB01 binary container for dense float64 arrays.

Layout (all little-endian)::

    b"MB01" | u64 rows | u64 cols | rows*cols float64, row-major

Vectors are stored with ``cols = 1``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInstance

__all__ = ["MAGIC", "write_array", "read_array", "read_vector"]

MAGIC = b"MB01"
_HEADER = struct.Struct("<4sQQ")


def write_array(path, array) -> None:
    a = np.asarray(array, dtype="<f8")
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError("only vectors and matrices can be stored")
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.ascontiguousarray(a).tobytes(order="C"))


def read_array(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise InvalidInstance(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InvalidInstance(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise InvalidInstance(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    return data.reshape(rows, cols).astype(float)


def read_vector(path) -> np.ndarray:
    a = read_array(path)
    if a.shape[1] != 1:
        raise InvalidInstance(f"{path}: expected a column vector, got shape {a.shape}")
    return a[:, 0]
