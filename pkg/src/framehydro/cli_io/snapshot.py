"""Binary snapshot files.

Layout: a 40-byte little-endian header ``<4sIIIddd`` holding the magic
``b"BXFH"``, the format version, nx, ny, lx, ly and t, followed by eleven
float64 fields of nx*ny values each, row-major: the nine frame components
n1x n1y n1z n2x ... n3z, then vx and vy.
"""

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"BXFH"
VERSION = 1
HEADER = struct.Struct("<4sIIIddd")
NFIELDS = 11


class SnapshotError(ValueError):
    """Malformed snapshot file."""


@dataclass
class Snapshot:
    nx: int
    ny: int
    lx: float
    ly: float
    t: float
    p: np.ndarray
    v: np.ndarray


def encode(nx, ny, lx, ly, t, p, v):
    if p.shape != (3, 3, nx, ny) or v.shape != (2, nx, ny):
        raise SnapshotError("field shapes do not match the grid")
    payload = np.concatenate([p.reshape(9, nx, ny), v]).astype("<f8", copy=False)
    header = HEADER.pack(MAGIC, VERSION, nx, ny, float(lx), float(ly), float(t))
    return header + np.ascontiguousarray(payload).tobytes()


def decode(data):
    if len(data) < HEADER.size:
        raise SnapshotError("file shorter than the header")
    magic, version, nx, ny, lx, ly, t = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported version {version}")
    expected = HEADER.size + NFIELDS * nx * ny * 8
    if len(data) != expected:
        raise SnapshotError(f"expected {expected} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(NFIELDS, nx, ny)
    arr = arr.astype(np.float64)
    return Snapshot(nx, ny, lx, ly, t, arr[:9].reshape(3, 3, nx, ny).copy(), arr[9:].copy())


def write_snapshot(path, grid, state):
    with open(path, "wb") as fh:
        fh.write(encode(grid.nx, grid.ny, grid.lx, grid.ly, state.t, state.p, state.v))


def read_snapshot(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
