"""Binary checkpoints: fixed little-endian header, JSON metadata, raw coefficients.

Layout::

    magic   4s   b"OBCK"
    version u32
    n, N    u32, u32
    L, t, theta   f64 x 3
    step    u64
    meta    u32 length + UTF-8 JSON (resolved config text and diagnostics state)
    data    complex128 little-endian, shape (1 + n + n(n+1)/2, N, ..., N)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .spectral import GridSpec, SpectralState

MAGIC = b"OBCK"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdddQI")


@dataclass
class Checkpoint:
    state: SpectralState
    t: float
    theta: float
    step: int
    meta: dict


def write_checkpoint(path, state, t, theta, step, meta=None):
    grid = state.grid
    blob = json.dumps(meta or {}, sort_keys=True).encode()
    data = np.ascontiguousarray(state.flat(), dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, grid.n, grid.N, grid.L, t, theta, step, len(blob)))
        fh.write(blob)
        fh.write(data.tobytes())


def read_checkpoint(path):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, n, N, L, t, theta, step, meta_len = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a checkpoint (magic {magic!r})")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        meta = json.loads(fh.read(meta_len).decode())
        grid = GridSpec(n, N, L)
        shape = (1 + n + grid.n_sym,) + grid.shape
        raw = fh.read()
    expected = int(np.prod(shape)) * 16
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} data bytes, found {len(raw)}")
    flat = np.frombuffer(raw, dtype="<c16").reshape(shape).astype(complex)
    return Checkpoint(SpectralState.from_flat(grid, flat), t, theta, step, meta)
