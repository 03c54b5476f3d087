"""DREE store writer.

The format the matcher's contextual mode consumes (all integers
little-endian):

    bytes 0-3   magic b"DREE"
    uint32      k (vector width)
    uint32      example count
    per example:
        uint32      id byte length
        bytes       example id, utf-8
        uint32      T (token positions)
        float32[]   T*k values, row-major

Writes go to a temporary sibling file first and are renamed into place, so a
failed export (disk full, interrupt) leaves no partial store behind.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"DREE"


class StoreWriteError(RuntimeError):
    pass


def write_store(path, dim: int, items) -> int:
    """Write ``(example_id, T x dim float32 matrix)`` pairs; returns the count."""
    entries = []
    for example_id, mat in items:
        arr = np.ascontiguousarray(mat, dtype="<f4")
        if arr.ndim != 2 or arr.shape[1] != dim:
            raise StoreWriteError(
                f"matrix for '{example_id}' has shape {arr.shape}, expected (T, {dim})"
            )
        entries.append((example_id, arr))
    tmp = f"{path}.partial"
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", dim, len(entries)))
            for example_id, arr in entries:
                raw_id = example_id.encode("utf-8")
                fh.write(struct.pack("<I", len(raw_id)))
                fh.write(raw_id)
                fh.write(struct.pack("<I", arr.shape[0]))
                fh.write(arr.tobytes())
            fh.flush()
            os.fsync(fh.fileno())
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    os.replace(tmp, path)
    return len(entries)
