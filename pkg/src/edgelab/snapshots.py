"""Binary snapshot and heatmap files.

Snapshot layout: a 64-byte little-endian header -- magic ``DESL``, version
u32, N1 u32, N2 u32, L1 f64, L2 f64, epsilon f64, time f64, zero padding --
followed by row-major (x1-major) interleaved float64 quadruples
(re1, im1, re2, im2) per grid point.

Heatmaps of |psi|^2 are 16-bit binary PGM (P5), linearly scaled to the frame
maximum, which is recorded in a ``<name>.max.txt`` sidecar.  Image rows run
from x2 = +L2 down, columns from x1 = -L1 up.
"""

from __future__ import annotations

import struct

import numpy as np

from .evolution import Grid2D, SpinorField

__all__ = ["write_snapshot", "read_snapshot", "export_pgm"]

MAGIC = b"DESL"
VERSION = 1
_HEADER = struct.Struct("<4sIII4xdddd")  # padded to 64 bytes with trailing zeros
_HEADER_SIZE = 64


def write_snapshot(path, field: SpinorField, epsilon):
    g = field.grid
    header = _HEADER.pack(MAGIC, VERSION, g.n1, g.n2, g.l1, g.l2, float(epsilon), float(field.time))
    header += b"\x00" * (_HEADER_SIZE - len(header))
    inter = np.empty((g.n1, g.n2, 4), dtype="<f8")
    inter[..., 0] = field.data[0].real
    inter[..., 1] = field.data[0].imag
    inter[..., 2] = field.data[1].real
    inter[..., 3] = field.data[1].imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(inter.tobytes())


def read_snapshot(path):
    """Read a snapshot; returns (SpinorField, epsilon)."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER_SIZE)
        if len(raw) < _HEADER_SIZE:
            raise ValueError("truncated snapshot header")
        magic, version, n1, n2, l1, l2, eps, time = _HEADER.unpack(raw[: _HEADER.size])
        if magic != MAGIC:
            raise ValueError(f"not a snapshot file (magic {magic!r})")
        if version != VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        body = np.frombuffer(fh.read(n1 * n2 * 4 * 8), dtype="<f8").reshape(n1, n2, 4)
    data = np.empty((2, n1, n2), dtype=complex)
    data[0] = body[..., 0] + 1j * body[..., 1]
    data[1] = body[..., 2] + 1j * body[..., 3]
    grid = Grid2D(n1=n1, n2=n2, l1=l1, l2=l2)
    return SpinorField(grid=grid, data=data, time=time), eps


def export_pgm(path, field: SpinorField):
    """Write |psi|^2 as 16-bit PGM; the scale maximum goes to a sidecar text file."""
    rho = field.density()
    peak = float(np.max(rho))
    scale = 65535.0 / peak if peak > 0 else 0.0
    img = np.asarray(np.round(rho * scale), dtype=">u2")
    # image convention: rows top-down in x2, columns left-right in x1
    img = img.T[::-1, :]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    with open(str(path) + ".max.txt", "w") as fh:
        fh.write(f"{peak!r}\n")
