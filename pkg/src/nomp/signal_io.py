"""File formats for complex signals and measurement matrices.

Two interchangeable signal containers:

* CSV — header ``re,im`` then one row per sample, floats printed with 17
  significant digits (enough to round-trip IEEE doubles through text).
* binary — an 8-byte little-endian unsigned sample count, then interleaved
  little-endian float64 (re, im) pairs.  Binary round-trips are bit exact.

Measurement matrices reuse the binary complex layout with a 16-byte header
holding the row and column counts.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<Q")
_MATRIX_HEADER = struct.Struct("<QQ")


def _interleave(z: np.ndarray) -> np.ndarray:
    flat = np.empty(2 * z.size, dtype="<f8")
    flat[0::2] = z.real.ravel()
    flat[1::2] = z.imag.ravel()
    return flat


def _deinterleave(flat: np.ndarray) -> np.ndarray:
    if flat.size % 2:
        raise ValueError("interleaved payload has odd float count")
    return flat[0::2] + 1j * flat[1::2]


def write_signal_csv(path: str | Path, y: np.ndarray) -> None:
    y = np.asarray(y, dtype=np.complex128)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("re,im\n")
        for z in y:
            fh.write(f"{z.real:.17g},{z.imag:.17g}\n")


def read_signal_csv(path: str | Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            if lineno == 1 and parts[0].lower() == "re":
                continue
            rows.append(complex(float(parts[0]), float(parts[1])))
    return np.asarray(rows, dtype=np.complex128)


def write_signal_bin(path: str | Path, y: np.ndarray) -> None:
    y = np.asarray(y, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(y.size))
        fh.write(_interleave(y).tobytes())


def read_signal_bin(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    (count,) = _HEADER.unpack_from(raw)
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if payload.size != 2 * count:
        raise ValueError(f"{path}: header says {count} samples, payload has {payload.size} floats")
    return _deinterleave(payload)


def read_signal(path: str | Path, fmt: str) -> np.ndarray:
    """Load a signal in the named format, ``csv`` or ``bin``."""
    if fmt == "csv":
        return read_signal_csv(path)
    if fmt == "bin":
        return read_signal_bin(path)
    raise ValueError(f"unknown signal format {fmt!r}")


def write_signal(path: str | Path, y: np.ndarray, fmt: str) -> None:
    if fmt == "csv":
        write_signal_csv(path, y)
    elif fmt == "bin":
        write_signal_bin(path, y)
    else:
        raise ValueError(f"unknown signal format {fmt!r}")


def write_matrix_bin(path: str | Path, a: np.ndarray) -> None:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    with open(path, "wb") as fh:
        fh.write(_MATRIX_HEADER.pack(a.shape[0], a.shape[1]))
        fh.write(_interleave(np.ascontiguousarray(a)).tobytes())


def read_matrix_bin(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _MATRIX_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    rows, cols = _MATRIX_HEADER.unpack_from(raw)
    payload = np.frombuffer(raw, dtype="<f8", offset=_MATRIX_HEADER.size)
    if payload.size != 2 * rows * cols:
        raise ValueError(f"{path}: header says {rows}x{cols}, payload has {payload.size} floats")
    return _deinterleave(payload).reshape(rows, cols)
