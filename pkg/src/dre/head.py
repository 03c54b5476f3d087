"""Two-layer feed-forward classifier: tanh hidden layer, softmax output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    Tensor,
    add_bias,
    cross_entropy_logits,
    matmul,
    no_grad,
    parameter,
    stable_softmax,
    tanh,
)

__all__ = ["HeadParams", "init_head_params", "head_logits", "predict", "loss"]


@dataclass
class HeadParams:
    w1: Tensor  # (in, d_h)
    b1: Tensor  # (d_h,)
    w_o: Tensor  # (d_h, n)
    b_o: Tensor  # (n,)

    @property
    def n_classes(self) -> int:
        return self.b_o.data.shape[0]


def init_head_params(
    in_width: int, hidden: int, n_classes: int, rng: np.random.Generator, dtype=np.float32
) -> HeadParams:
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    if hidden < 1:
        raise ValueError(f"head hidden width must be >= 1, got {hidden}")
    b1 = 1.0 / np.sqrt(in_width)
    b2 = 1.0 / np.sqrt(hidden)
    return HeadParams(
        w1=parameter(rng.uniform(-b1, b1, size=(in_width, hidden)).astype(dtype)),
        b1=parameter(np.zeros(hidden, dtype=dtype)),
        w_o=parameter(rng.uniform(-b2, b2, size=(hidden, n_classes)).astype(dtype)),
        b_o=parameter(np.zeros(n_classes, dtype=dtype)),
    )


def head_logits(x: Tensor, params: HeadParams) -> Tensor:
    """(..., in) -> (..., n) unnormalized class scores."""
    hidden = tanh(add_bias(matmul(x, params.w1), params.b1))
    return add_bias(matmul(hidden, params.w_o), params.b_o)


def predict(x: Tensor, params: HeadParams) -> np.ndarray:
    """Class probabilities (plain numpy; no graph is recorded)."""
    with no_grad():
        logits = head_logits(x, params)
    return stable_softmax(logits.data)


def loss(logits: Tensor, labels) -> Tensor:
    """Mean cross-entropy on class-index labels via the fused stable path.

    ``logits`` is (B, n); a scalar label is accepted for B == 1.
    """
    return cross_entropy_logits(logits, np.atleast_1d(np.asarray(labels)))
