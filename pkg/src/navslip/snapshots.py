"""Binary field snapshots (VFLD format).

Layout (all multi-byte values little-endian):

====== ======== ==========================================
offset type     meaning
====== ======== ==========================================
0      4 bytes  magic ``VFLD``
4      u32      version (1)
8      u8       domain kind: 0 walls, 1 periodic in z
9      u32 x3   Nx, Ny, Nz
21     f64 x2   Lx, Ly
37     f64      time t
45     f64 x2   nu, zeta
53     f64 ...  payload: 3*Nx*Ny*Nz grid values
====== ======== ==========================================

The payload stores physical-grid values (not coefficients) in
component-major, x-fastest order, which keeps files comparable across
transform conventions.  Round trips are bit exact.

The header carries the periodic extents Lx and Ly only; periodic-z
snapshots (domain kind 1) are reconstructed with the default z extent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, IoError, TruncatedPayload, VersionUnsupported
from .spectral import ChannelSpec, SpectralField

MAGIC = b"VFLD"
VERSION = 1
_HEADER = struct.Struct("<4sIBIIIddddd")  # magic, ver, kind, N..., Lx, Ly, t, nu, zeta


@dataclass
class SnapshotHeader:
    domain_kind: int
    Nx: int
    Ny: int
    Nz: int
    Lx: float
    Ly: float
    t: float
    nu: float
    zeta: float
    # exact payload as stored; the SpectralField view adds one transform
    # round trip (~1 ulp), the payload itself is bit-exact
    grid: np.ndarray = field(default=None, repr=False, compare=False)


def write_snapshot(path, field, t=0.0, nu=0.0, zeta=1.0):
    """Write a SpectralField's grid values; bit-exact round trip."""
    grid = field.grid()
    _, Nx, Ny, Nz = grid.shape
    kind = 1 if field.spec.z_periodic else 0
    header = _HEADER.pack(
        MAGIC, VERSION, kind, Nx, Ny, Nz,
        field.spec.Lx, field.spec.Ly, float(t), float(nu), float(zeta),
    )
    # component-major, x fastest: (3, Nz, Ny, Nx) then ravel
    payload = np.ascontiguousarray(grid.transpose(0, 3, 2, 1), dtype="<f8")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload.tobytes())
    except OSError as exc:
        raise IoError(f"cannot write snapshot {path}: {exc}") from exc


def read_snapshot(path):
    """Read a snapshot; returns (SpectralField, SnapshotHeader)."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read snapshot {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise TruncatedPayload(f"{path}: file shorter than the header")
    magic, version, kind, Nx, Ny, Nz, Lx, Ly, t, nu, zeta = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagic(f"{path}: magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionUnsupported(f"{path}: version {version}, reader supports {VERSION}")
    count = 3 * Nx * Ny * Nz
    expected = _HEADER.size + 8 * count
    if len(blob) < expected:
        raise TruncatedPayload(
            f"{path}: payload has {(len(blob) - _HEADER.size) // 8} of {count} values"
        )
    flat = np.frombuffer(blob, dtype="<f8", count=count, offset=_HEADER.size)
    grid = np.ascontiguousarray(flat.reshape(3, Nz, Ny, Nx).transpose(0, 3, 2, 1))
    spec = ChannelSpec(Lx=Lx, Ly=Ly, z_periodic=(kind == 1))
    fld = SpectralField.from_grid(grid, spec)
    header = SnapshotHeader(
        domain_kind=kind, Nx=Nx, Ny=Ny, Nz=Nz, Lx=Lx, Ly=Ly, t=t, nu=nu,
        zeta=zeta, grid=grid,
    )
    return fld, header
