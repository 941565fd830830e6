"""Portable binary snapshots of a :class:`~mzk.spectral.SpectralField`.

Layout (all little-endian)::

    bytes 0-3    magic b"MZK1"
    int32        bandwidth K
    float64      time t
    float64      nonlinearity coefficient lambda
    float64      Sobolev index s
    (2K+1)^2 x (float64 real, float64 imag)
                 coefficients in storage order: k1 from -K to K (slowest),
                 then k2 from -K to K
"""
import struct

import numpy as np

from .errors import DataError
from .spectral import SpectralField, TorusGrid

MAGIC = b"MZK1"
_HEADER = struct.Struct("<4siddd")


def dumps(field, t=0.0, lam=0.0, s=0.0) -> bytes:
    head = _HEADER.pack(MAGIC, field.grid.K, float(t), float(lam), float(s))
    return head + field.coeffs.astype("<c16").tobytes(order="C")


def loads(data: bytes):
    """Return ``(field, t, lam, s)``."""
    if len(data) < _HEADER.size:
        raise DataError("snapshot truncated before end of header")
    magic, K, t, lam, s = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"bad snapshot magic {magic!r}")
    if K < 0:
        raise DataError(f"snapshot header has negative bandwidth {K}")
    M = 2 * K + 1
    body = data[_HEADER.size:]
    if len(body) != 16 * M * M:
        raise DataError(f"snapshot body has {len(body)} bytes, expected {16 * M * M}")
    coeffs = np.frombuffer(body, dtype="<c16").reshape(M, M)
    return SpectralField(TorusGrid(K), coeffs), t, lam, s


def write_snapshot(path, field, t=0.0, lam=0.0, s=0.0):
    with open(path, "wb") as fh:
        fh.write(dumps(field, t, lam, s))


def read_snapshot(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
