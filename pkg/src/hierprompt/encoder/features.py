"""Binary import/export of precomputed (global, dense) feature pairs.

Layout, all little-endian:

    magic   5 bytes  b"HPFV1"
    version u32      1
    d       u32      feature dimension
    n_items u32      number of items
    n_dense u32      dense rows per item
    payload n_items * (d + n_dense*d) float32

This is the bridge for supplying externally computed features (e.g. from a
real vision backbone) to the scoring path.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import FormatError, IoError, NonFiniteValue

FEATURE_MAGIC = b"HPFV1"
_HEADER = struct.Struct("<5sIIII")
FEATURE_VERSION = 1


def write_features(path: str | Path,
                   items: Sequence[tuple[np.ndarray, np.ndarray]]) -> None:
    """Write (global, dense) pairs; dense shape must agree across items."""
    if not items:
        raise IoError("refusing to write an empty feature file")
    d = int(np.asarray(items[0][0]).shape[0])
    n_dense = int(np.asarray(items[0][1]).shape[0])
    chunks = [_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, d, len(items), n_dense)]
    for i, (g, dense) in enumerate(items):
        g = np.asarray(g, dtype=np.float32)
        dense = np.asarray(dense, dtype=np.float32)
        if g.shape != (d,) or dense.shape != (n_dense, d):
            raise FormatError(f"item {i} has shapes {g.shape}/{dense.shape}, "
                              f"expected ({d},)/({n_dense}, {d})")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(dense))):
            raise NonFiniteValue(f"item {i} contains non-finite values")
        chunks.append(g.tobytes())
        chunks.append(dense.tobytes())
    try:
        Path(path).write_bytes(b"".join(chunks))
    except OSError as e:
        raise IoError(f"cannot write feature file {path}: {e}") from e


def read_features(path: str | Path) -> list[tuple[np.ndarray, np.ndarray]]:
    """Read items in file order; shapes and finiteness are enforced."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read feature file {path}: {e}") from e
    if len(blob) < _HEADER.size:
        raise FormatError("truncated header", offset=len(blob))
    magic, version, d, n_items, n_dense = _HEADER.unpack_from(blob, 0)
    if magic != FEATURE_MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != FEATURE_VERSION:
        raise FormatError(f"unsupported version {version}", offset=5)
    item_floats = d + n_dense * d
    expected = _HEADER.size + 4 * n_items * item_floats
    if len(blob) != expected:
        raise FormatError(
            f"payload length {len(blob) - _HEADER.size} does not match header "
            f"(expected {expected - _HEADER.size} bytes)", offset=_HEADER.size)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    view = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    for i in range(n_items):
        base = i * item_floats
        g = view[base: base + d].astype(np.float64)
        dense = (view[base + d: base + item_floats]
                 .reshape(n_dense, d).astype(np.float64))
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(dense))):
            raise NonFiniteValue(f"item {i} contains non-finite values")
        out.append((g, dense))
    return out
