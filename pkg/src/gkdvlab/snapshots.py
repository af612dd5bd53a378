"""Binary snapshot format: byte-exact persistence of one solution frame.

Layout (little-endian, no padding):
    magic   4 bytes  b"GKDV"
    version u32      currently 1
    p       u32
    L       f64
    N       u64
    t       f64
    data    N * f64
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import Field, GridSpec
from .errors import FormatError

__all__ = ["MAGIC", "VERSION", "save_snapshot", "load_snapshot"]

MAGIC = b"GKDV"
VERSION = 1
_HEADER = struct.Struct("<4sIIdQd")


def save_snapshot(u: Field, path: Union[str, Path]) -> None:
    """Write the field bit-exactly; loading it back reproduces the bytes."""
    header = _HEADER.pack(MAGIC, VERSION, u.p, u.grid.L, u.grid.N, u.t)
    data = np.ascontiguousarray(u.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def load_snapshot(path: Union[str, Path], dt: Optional[float] = None) -> Field:
    """Read a snapshot; ``dt`` attaches a time step if the field will be
    evolved further (the format itself stores none)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, p, L, N, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    expected = _HEADER.size + 8 * N
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).copy()
    try:
        grid = GridSpec(L=L, N=int(N), dt=dt)
        return Field(grid, int(p), float(t), values)
    except Exception as err:
        raise FormatError(f"{path}: invalid snapshot contents: {err}") from err
