"""Checkpoint container: bit-exact round trips and corruption handling."""

import numpy as np
import pytest

from dre.checkpoint import (
    CheckpointError,
    load_checkpoint,
    load_model,
    save_checkpoint,
    save_model,
)
from dre.data import Batch
from dre.gradcheck import build_tiny_matcher


def test_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    config = {"labels": ["a", "b"], "note": "unicode ok: پاک"}
    params = {
        "w": rng.normal(size=(3, 4)).astype(np.float32),
        "b64": rng.normal(size=7).astype(np.float64),
        "scalarish": rng.normal(size=1).astype(np.float32),
    }
    path = tmp_path / "m.dre1"
    save_checkpoint(path, config, params)
    got_config, got_params = load_checkpoint(path)
    assert got_config == config
    for name, arr in params.items():
        assert got_params[name].dtype == arr.dtype
        assert got_params[name].tobytes() == arr.tobytes()

    # re-saving the loaded state reproduces the file byte for byte
    path2 = tmp_path / "m2.dre1"
    save_checkpoint(path2, got_config, got_params)
    assert path.read_bytes() == path2.read_bytes()


def test_magic_bytes(tmp_path):
    path = tmp_path / "m.dre1"
    save_checkpoint(path, {}, {})
    assert path.read_bytes()[:4] == b"DRE1"
    bad = tmp_path / "bad.dre1"
    bad.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(bad)


def test_truncated_checkpoint_reports_offset(tmp_path):
    path = tmp_path / "m.dre1"
    save_checkpoint(path, {"k": 1}, {"w": np.ones((4, 4), dtype=np.float32)})
    blob = path.read_bytes()
    cut = tmp_path / "cut.dre1"
    cut.write_bytes(blob[: len(blob) - 13])
    with pytest.raises(CheckpointError, match="byte offset"):
        load_checkpoint(cut)


def test_model_round_trip_reproduces_forward_pass(tmp_path):
    _, _, model = build_tiny_matcher()
    path = tmp_path / "model.dre1"
    save_model(path, model)
    restored = load_model(path)

    assert restored.config == model.config
    assert restored.vocab.tokens == model.vocab.tokens
    rng = np.random.default_rng(1)
    batch = Batch(
        token_ids=rng.integers(0, 10, size=(2, 4)),
        segment_ids=rng.integers(0, 2, size=(2, 4)),
        mask=np.ones((2, 4), dtype=bool),
        labels=None,
        example_ids=["a", "b"],
    )
    p1 = model.infer_batch(batch).probs
    p2 = restored.infer_batch(batch).probs
    assert np.array_equal(p1, p2)


def test_load_arrays_validates_names(tmp_path):
    _, _, model = build_tiny_matcher()
    arrays = model.parameter_arrays()
    arrays = {k: v for k, v in arrays.items() if k != "attn.w_a"}
    with pytest.raises(ValueError, match="attn.w_a"):
        model.load_arrays(arrays)
