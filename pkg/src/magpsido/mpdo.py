"""Operator persistence in the MPDO1 binary format.

Layout (little endian): magic "MPDO1\\0", u32 d, u32 n, f64 L, u32 flags
(bit 0: hermitized), then n^(2d) complex entries as interleaved f64 pairs in
row-major order.
"""
import hashlib
import os
import struct
import tempfile

import numpy as np

from .errors import BudgetError, FormatError
from .quantize import Grid, OperatorMatrix

MAGIC = b"MPDO1\x00"
_HEADER = struct.Struct("<IId I")  # d, n, L, flags
LOAD_BUDGET_BYTES = 2 * 1024**3


def save_operator(op, path):
    """Write an operator matrix; the write is atomic (tmp file + rename)."""
    grid = op.grid
    flags = 1 if op.symmetrized else 0
    entries = np.ascontiguousarray(op.entries, dtype=np.complex128)
    interleaved = entries.view(np.float64).astype("<f8", copy=False)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".mpdo.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(grid.dimension, grid.n, grid.L, flags))
            interleaved.tofile(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_operator(path, budget_bytes=LOAD_BUDGET_BYTES):
    """Read an MPDO1 file back into an OperatorMatrix; bit-exact round trip."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r} in {path}")
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise FormatError("truncated header")
        d, n, L, flags = _HEADER.unpack(header)
        if d not in (1, 2) or n < 4 or n % 2 or L <= 0:
            raise FormatError(f"invalid dimensions d={d} n={n} L={L}")
        size = n**d
        nbytes = 16 * size * size
        if nbytes > budget_bytes:
            raise BudgetError(
                f"operator needs {nbytes / 1e9:.2f} GB, over the "
                f"{budget_bytes / 1e9:.2f} GB load budget")
        raw = np.fromfile(fh, dtype="<f8", count=2 * size * size)
        if raw.size != 2 * size * size:
            raise FormatError(f"truncated payload in {path}")
        if fh.read(1):
            raise FormatError(f"trailing bytes in {path}")
    entries = raw.astype(np.float64).view(np.complex128).reshape(size, size)
    grid = Grid(d, L, n)
    return OperatorMatrix(entries, grid, symbol_id=os.path.basename(path),
                          symmetrized=bool(flags & 1))


def file_hash(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
