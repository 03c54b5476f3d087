"""Binary checkpoint container with a bit-exact round trip.

Layout (all integers little-endian):

    bytes 0-3   magic b"DRE1"
    uint32      config byte length
    bytes       config as canonical JSON (sorted keys, no spaces), utf-8
    uint32      parameter count
    per parameter (sorted by name):
        uint16      name byte length
        bytes       name, utf-8
        uint8       dtype tag (0 = float32, 1 = float64)
        uint8       rank
        uint32[]    shape
        bytes       raw little-endian values, row-major
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import DreModel, ModelConfig
from .vocab import Vocabulary

__all__ = ["CheckpointError", "save_checkpoint", "load_checkpoint", "save_model", "load_model", "MAGIC"]

MAGIC = b"DRE1"
_DTYPE_TAGS = {np.dtype("float32"): 0, np.dtype("float64"): 1}
_TAG_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, config: dict, params: dict[str, np.ndarray]):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            arr = np.ascontiguousarray(params[name])
            tag = _DTYPE_TAGS.get(arr.dtype)
            if tag is None:
                raise CheckpointError(f"parameter '{name}' has unsupported dtype {arr.dtype}")
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(struct.pack("<BB", tag, arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype(_TAG_DTYPES[tag], copy=False).tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise CheckpointError(
            f"truncated checkpoint: expected {n} bytes for {what} at byte offset {fh.tell() - len(buf)}"
        )
    return buf


def load_checkpoint(path):
    """Returns (config dict, name -> array dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
        (blob_len,) = struct.unpack("<I", _read_exact(fh, 4, "config length"))
        config = json.loads(_read_exact(fh, blob_len, "config block").decode("utf-8"))
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "parameter count"))
        params: dict[str, np.ndarray] = {}
        for i in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, f"name length of parameter {i}"))
            name = _read_exact(fh, name_len, f"name of parameter {i}").decode("utf-8")
            tag, rank = struct.unpack("<BB", _read_exact(fh, 2, f"dtype/rank of '{name}'"))
            if tag not in _TAG_DTYPES:
                raise CheckpointError(f"parameter '{name}' has unknown dtype tag {tag}")
            shape = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank, f"shape of '{name}'"))
            dtype = _TAG_DTYPES[tag]
            raw = _read_exact(fh, int(np.prod(shape, dtype=np.int64)) * dtype.itemsize, f"values of '{name}'")
            params[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return config, params


def save_model(path, model: DreModel):
    config = model.config.to_dict()
    if model.vocab is not None:
        config["vocab"] = list(model.vocab.tokens)
        config["min_frequency"] = model.vocab.min_frequency
    save_checkpoint(path, config, model.parameter_arrays())


def load_model(path) -> DreModel:
    config, params = load_checkpoint(path)
    vocab = None
    if "vocab" in config:
        vocab = Vocabulary(config["vocab"], config.get("min_frequency", 1))
    model = DreModel(ModelConfig.from_dict(config), vocab)
    model.load_arrays(params)
    return model
