"""Per-token representation providers.

Lookup mode holds a trainable |V| x k token table plus a 2 x k segment
table. Contextual mode serves frozen per-example matrices from a "DREE"
store file written by an external encoder; no gradient flows into it.

DREE store layout (all integers little-endian):

    bytes 0-3   magic b"DREE"
    uint32      k (vector width)
    uint32      example count
    per example:
        uint32      id byte length
        bytes       example id, utf-8
        uint32      T (number of token positions)
        float32[]   T*k values, row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .autodiff import Tensor, add, gather_rows, parameter, scale_rows, tensor
from .sequence import TokenSequence

__all__ = [
    "LookupEmbedding",
    "ContextualStore",
    "StoreFormatError",
    "load_contextual_store",
    "write_contextual_store",
    "STORE_MAGIC",
]

STORE_MAGIC = b"DREE"


class StoreFormatError(ValueError):
    pass


class LookupEmbedding:
    """Trainable token + segment tables; rows of padded positions are zeroed."""

    def __init__(self, vocab_size: int, dim: int, rng: np.random.Generator, dtype=np.float32):
        self.dim = dim
        self.token_table = parameter(
            rng.uniform(-0.05, 0.05, size=(vocab_size, dim)).astype(dtype)
        )
        self.segment_table = parameter(
            rng.uniform(-0.05, 0.05, size=(2, dim)).astype(dtype)
        )

    def parameters(self) -> dict[str, Tensor]:
        return {"emb.token_table": self.token_table, "emb.segment_table": self.segment_table}

    def embed_ids(self, token_ids, segment_ids, mask) -> Tensor:
        """(..., T) id arrays -> (..., T, k) rows; masked rows exactly zero."""
        rows = add(
            gather_rows(self.token_table, np.asarray(token_ids)),
            gather_rows(self.segment_table, np.asarray(segment_ids)),
        )
        mf = tensor(np.asarray(mask, dtype=bool), dtype=self.token_table.data.dtype)
        return scale_rows(rows, mf)

    def embed(self, seq: TokenSequence) -> Tensor:
        """Single sequence -> (T, k)."""
        return self.embed_ids(seq.token_ids, seq.segment_ids, seq.mask)


class ContextualStore:
    """Frozen per-example (T, k) float32 matrices keyed by example id."""

    def __init__(self, dim: int, matrices: dict[str, np.ndarray]):
        self.dim = dim
        self._matrices = matrices

    def __len__(self) -> int:
        return len(self._matrices)

    def __contains__(self, example_id: str) -> bool:
        return example_id in self._matrices

    def ids(self):
        return self._matrices.keys()

    def embed(self, example_id: str) -> np.ndarray:
        """The stored matrix, verbatim."""
        try:
            return self._matrices[example_id]
        except KeyError:
            raise KeyError(f"contextual store has no vectors for example '{example_id}'") from None


def write_contextual_store(path, dim: int, items) -> int:
    """Write ``(example_id, matrix)`` pairs in DREE layout; returns the count."""
    entries = []
    for example_id, mat in items:
        arr = np.ascontiguousarray(mat, dtype="<f4")
        if arr.ndim != 2 or arr.shape[1] != dim:
            raise StoreFormatError(
                f"matrix for '{example_id}' has shape {arr.shape}, expected (T, {dim})"
            )
        entries.append((example_id, arr))
    with open(path, "wb") as fh:
        fh.write(STORE_MAGIC)
        fh.write(struct.pack("<II", dim, len(entries)))
        for example_id, arr in entries:
            raw_id = example_id.encode("utf-8")
            fh.write(struct.pack("<I", len(raw_id)))
            fh.write(raw_id)
            fh.write(struct.pack("<I", arr.shape[0]))
            fh.write(arr.tobytes())
    return len(entries)


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise StoreFormatError(
            f"truncated store: expected {n} bytes for {what} at byte offset {fh.tell() - len(buf)}"
        )
    return buf


def load_contextual_store(path, expected_dim: int | None = None) -> ContextualStore:
    """Read a DREE file into memory, validating the header and every record."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != STORE_MAGIC:
            raise StoreFormatError(f"bad magic {magic!r}, expected {STORE_MAGIC!r}")
        dim, count = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if expected_dim is not None and dim != expected_dim:
            raise StoreFormatError(
                f"store vector width k={dim} does not match the configured model width k={expected_dim}"
            )
        matrices: dict[str, np.ndarray] = {}
        for i in range(count):
            (id_len,) = struct.unpack("<I", _read_exact(fh, 4, f"id length of record {i}"))
            example_id = _read_exact(fh, id_len, f"id of record {i}").decode("utf-8")
            (T,) = struct.unpack("<I", _read_exact(fh, 4, f"length of record {i}"))
            raw = _read_exact(fh, T * dim * 4, f"values of record '{example_id}'")
            matrices[example_id] = np.frombuffer(raw, dtype="<f4").reshape(T, dim).copy()
    return ContextualStore(dim, matrices)
