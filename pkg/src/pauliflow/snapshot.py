"""Binary field snapshots (.pwf): header + raw little-endian payload.

Layout (all little-endian, no padding):

    bytes 0-3    magic "PWF1"
    bytes 4-7    u32 grid size n
    bytes 8-15   f64 box_length
    bytes 16-19  u32 component count (1 scalar, 3 vector, 2 spinor)
    bytes 20-23  u32 complex flag (0 real f64, 1 complex: interleaved
                 f64 re/im pairs)

followed by the components in order, each n^3 values with the x index
fastest. Round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, VectorField
from .spinor import SpinorField

__all__ = ["MAGIC", "SnapshotError", "write_snapshot", "read_snapshot"]

MAGIC = b"PWF1"
_HEADER = struct.Struct("<4sIdII")


class SnapshotError(ValueError):
    """Malformed snapshot file (bad magic, size mismatch, bad layout)."""


def _field_layout(field):
    if isinstance(field, ScalarField):
        return field.values[None], 0
    if isinstance(field, VectorField):
        return field.components, 0
    if isinstance(field, SpinorField):
        return field.components, 1
    raise TypeError(f"cannot snapshot object of type {type(field).__name__}")


def write_snapshot(path, field) -> None:
    """Serialize a scalar, vector, or spinor field to a .pwf file."""
    stack, complex_flag = _field_layout(field)
    g = field.grid
    dtype = "<c16" if complex_flag else "<f8"
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.n, g.box_length, stack.shape[0], complex_flag))
        for comp in stack:
            fh.write(np.ascontiguousarray(comp.ravel(order="F")).astype(dtype).tobytes())


def read_snapshot(path):
    """Load a .pwf file, inferring the field type from its header.

    (components, complex) of (1, 0) -> ScalarField, (3, 0) -> VectorField,
    (2, 1) -> SpinorField; anything else is rejected. The payload length
    must match the header exactly.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, n, box_length, n_comp, complex_flag = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if complex_flag not in (0, 1):
        raise SnapshotError(f"{path}: invalid complex flag {complex_flag}")
    kind = (n_comp, complex_flag)
    if kind not in ((1, 0), (3, 0), (2, 1)):
        raise SnapshotError(
            f"{path}: unsupported layout (components={n_comp}, complex={complex_flag})"
        )
    try:
        grid = Grid(int(n), float(box_length))
    except ValueError as exc:
        raise SnapshotError(f"{path}: invalid grid header: {exc}") from None

    dtype = np.dtype("<c16" if complex_flag else "<f8")
    expected = _HEADER.size + n_comp * n**3 * dtype.itemsize
    if len(raw) != expected:
        raise SnapshotError(
            f"{path}: payload size {len(raw) - _HEADER.size} does not match "
            f"header (expected {expected - _HEADER.size})"
        )
    flat = np.frombuffer(raw, dtype=dtype, count=n_comp * n**3, offset=_HEADER.size)
    # Split components first (they are stored contiguously), then undo the
    # x-fastest flattening of each one separately.
    comps = np.stack(
        [row.reshape((n, n, n), order="F") for row in flat.reshape(n_comp, -1)]
    )
    if kind == (1, 0):
        return ScalarField(grid, comps[0])
    if kind == (3, 0):
        return VectorField(grid, comps)
    return SpinorField(grid, comps)
