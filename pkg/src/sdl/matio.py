"""Matrix file formats shared by the CLI and the library.

Binary format ("SDLM"):
    magic bytes  b"SDLM"
    version      1 byte, currently 1
    rows, cols   little-endian unsigned 64-bit integers
    payload      rows*cols IEEE-754 little-endian float64, row-major

CSV alternative: comma-separated rows, no header, parsed as float64.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ParseError

MAGIC = b"SDLM"
VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def write_matrix(path: str | Path, m: np.ndarray, fmt: str = "bin") -> None:
    """Write a 2-d float64 matrix as SDLM binary (``fmt="bin"``) or CSV."""
    m = np.ascontiguousarray(np.atleast_2d(m), dtype=np.float64)
    path = Path(path)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1]))
            fh.write(m.astype("<f8").tobytes(order="C"))
    elif fmt == "csv":
        with open(path, "w") as fh:
            for row in m:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a matrix, sniffing SDLM binary by its magic bytes, else CSV."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        return _read_binary(raw)
    return _read_csv(raw)


def _read_binary(raw: bytes) -> np.ndarray:
    if len(raw) < _HEADER.size:
        raise ParseError("truncated header", len(raw))
    magic, version, rows, cols = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", 4)
    expected = _HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise ParseError(
            f"payload size mismatch: expected {expected} bytes for {rows}x{cols}",
            min(len(raw), expected),
        )
    data = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=_HEADER.size)
    return data.reshape(rows, cols).astype(np.float64)


def _read_csv(raw: bytes) -> np.ndarray:
    rows: list[list[float]] = []
    offset = 0
    ncols = None
    for line in raw.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            fields = stripped.split(b",")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise ParseError("unparseable CSV field", offset) from None
            if ncols is None:
                ncols = len(values)
            elif len(values) != ncols:
                raise ParseError(
                    f"ragged CSV row: expected {ncols} fields, got {len(values)}",
                    offset,
                )
            rows.append(values)
        offset += len(line)
    if not rows:
        raise ParseError("empty matrix file", 0)
    return np.array(rows, dtype=np.float64)
