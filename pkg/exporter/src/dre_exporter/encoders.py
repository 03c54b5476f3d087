"""Contextual encoders behind one small interface.

An encoder turns one text pair into a (T, hidden_size) float32 matrix, one
row per subword/token position of the joint sequence. Two backends:

* ``hash-<dim>`` — offline deterministic baseline: each token's vector is
  drawn from an RNG seeded by the token's hash, plus a fixed sinusoidal
  positional component. No pretrained weights needed; useful for tests and
  for exercising the store pipeline end to end.
* ``hf:<name>`` — any Hugging-Face transformer (e.g. ``hf:bert-base-uncased``),
  loaded lazily; emits the final hidden states at subword level in
  inference mode. Available only where the pretrained weights are.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .sequence import joint_tokens


class EncoderError(RuntimeError):
    pass


class HashProjectionEncoder:
    """Deterministic per-token vectors; stands in for a pretrained encoder."""

    def __init__(self, hidden_size: int = 64):
        if hidden_size < 1:
            raise EncoderError(f"hidden size must be >= 1, got {hidden_size}")
        self.hidden_size = hidden_size
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "little")
            rng = np.random.default_rng(seed)
            vec = (rng.standard_normal(self.hidden_size) / math.sqrt(self.hidden_size)).astype(
                np.float32
            )
            self._cache[token] = vec
        return vec

    def _position_vector(self, pos: int) -> np.ndarray:
        idx = np.arange(self.hidden_size, dtype=np.float64)
        angles = pos / np.power(10000.0, 2 * (idx // 2) / self.hidden_size)
        out = np.where(idx % 2 == 0, np.sin(angles), np.cos(angles))
        return (0.1 * out).astype(np.float32)

    def encode_pair(self, text_a: str, text_b: str, max_len: int) -> np.ndarray:
        tokens = joint_tokens(text_a, text_b, max_len)
        rows = [self._token_vector(t) + self._position_vector(i) for i, t in enumerate(tokens)]
        return np.stack(rows).astype(np.float32)


class TransformersEncoder:
    """Final hidden states of a pretrained Hugging-Face model, frozen."""

    def __init__(self, model_name: str):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as e:
            raise EncoderError(f"transformers backend unavailable: {e}") from e
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.eval()
        self.hidden_size = int(self.model.config.hidden_size)

    def encode_pair(self, text_a: str, text_b: str, max_len: int) -> np.ndarray:
        # longest_first truncation mirrors the matcher's trimming policy
        encoded = self.tokenizer(
            text_a,
            text_b,
            truncation="longest_first",
            max_length=max_len,
            return_tensors="pt",
        )
        with self._torch.no_grad():
            out = self.model(**encoded)
        hidden = out.last_hidden_state[0].cpu().numpy().astype(np.float32)
        if hidden.shape[1] != self.hidden_size:
            raise EncoderError(
                f"model emitted width {hidden.shape[1]}, config declares {self.hidden_size}"
            )
        return hidden


def make_encoder(identifier: str):
    """``hash-<dim>`` or ``hf:<model name>``."""
    if identifier.startswith("hash-"):
        try:
            dim = int(identifier.split("-", 1)[1])
        except ValueError:
            raise EncoderError(f"bad hash encoder id '{identifier}' (expected hash-<dim>)") from None
        return HashProjectionEncoder(dim)
    if identifier.startswith("hf:"):
        return TransformersEncoder(identifier[3:])
    raise EncoderError(f"unknown encoder identifier '{identifier}' (expected hash-<dim> or hf:<name>)")
