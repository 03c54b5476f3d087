"""Scalar attention over assembled token representations, then max+mean pooling."""

from __future__ import annotations

import numpy as np

from .autodiff import (
    Tensor,
    concat_last,
    masked_max_time,
    masked_mean_time,
    matmul,
    scale_rows,
    softmax_masked,
    tanh,
)

__all__ = [
    "attention_input_width",
    "assemble_attention_input",
    "attention_weights",
    "apply_attention",
    "pool",
]


def attention_input_width(k: int, hidden_size: int, num_layers: int) -> int:
    return k + 2 * hidden_size * num_layers


def assemble_attention_input(emb: Tensor, layer_outputs: list[Tensor]) -> Tensor:
    """Concat embeddings with every layer's output, layer order ascending."""
    return concat_last([emb] + list(layer_outputs))


def attention_weights(h_cat: Tensor, w_a: Tensor, mask) -> Tensor:
    """Per-token importance: softmax over tanh(h_t . w_a), masked positions zero."""
    scores = tanh(matmul(h_cat, w_a))
    return softmax_masked(scores, np.asarray(mask, dtype=bool))


def apply_attention(h_cat: Tensor, weights: Tensor) -> Tensor:
    """Scale each token row by its attention weight."""
    return scale_rows(h_cat, weights)


def pool(rows: Tensor, mask) -> Tensor:
    """Concat elementwise max and mean over unmasked rows: (..., T, d) -> (..., 2d)."""
    m = np.asarray(mask, dtype=bool)
    return concat_last([masked_max_time(rows, m), masked_mean_time(rows, m)])
