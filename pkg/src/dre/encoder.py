"""Stacked Bi-LSTM encoder with dense residual wiring.

With the residual switch on, layer l consumes the original embeddings
concatenated with every previous layer's output, most recent first:
x_l = [emb; h_{l-1}; ...; h_1]. Switched off, each layer sees only its
predecessor. Both directions run over real tokens only; padded positions
carry exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    ShapeError,
    Tensor,
    add,
    add_bias,
    concat_last,
    dropout,
    matmul,
    mul,
    scale_rows,
    sigmoid,
    slice_last,
    slice_time,
    stack_time,
    tanh,
    tensor,
)

__all__ = [
    "EncoderConfig",
    "LstmDirectionParams",
    "LstmLayerParams",
    "init_layer_params",
    "init_encoder_params",
    "layer_input_width",
    "encoder_param_count",
    "direction_param_count",
    "lstm_cell_step",
    "bilstm_layer",
    "encode",
]


@dataclass
class EncoderConfig:
    num_layers: int = 3
    hidden_size: int = 128
    residual: bool = True
    dropout_retention: float = 0.5

    def __post_init__(self):
        if self.num_layers < 1:
            raise ValueError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.hidden_size < 1:
            raise ValueError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if not (0.0 < self.dropout_retention <= 1.0):
            raise ValueError(
                f"dropout_retention must be in (0, 1], got {self.dropout_retention}"
            )


@dataclass
class LstmDirectionParams:
    """Gate order along the 4H axis is fixed: [input, forget, candidate, output]."""

    w_x: Tensor  # (d, 4H)
    w_h: Tensor  # (H, 4H)
    b: Tensor  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.w_h.data.shape[0]

    @property
    def input_width(self) -> int:
        return self.w_x.data.shape[0]


@dataclass
class LstmLayerParams:
    fwd: LstmDirectionParams
    bwd: LstmDirectionParams


def layer_input_width(k: int, layer: int, config: EncoderConfig) -> int:
    """Input width of 1-based ``layer`` given embedding width ``k``."""
    if config.residual:
        return k + 2 * config.hidden_size * (layer - 1)
    return k if layer == 1 else 2 * config.hidden_size


def direction_param_count(d: int, h: int) -> int:
    return 4 * (d * h + h * h + h)


def encoder_param_count(k: int, config: EncoderConfig) -> int:
    """Closed-form count: sum over layers of both directions' gate parameters."""
    h = config.hidden_size
    return sum(
        2 * direction_param_count(layer_input_width(k, l, config), h)
        for l in range(1, config.num_layers + 1)
    )


def _init_direction(d: int, h: int, rng: np.random.Generator, dtype) -> LstmDirectionParams:
    from .autodiff import parameter

    bound = 1.0 / np.sqrt(h)
    w_x = parameter(rng.uniform(-bound, bound, size=(d, 4 * h)).astype(dtype))
    w_h = parameter(rng.uniform(-bound, bound, size=(h, 4 * h)).astype(dtype))
    bias = np.zeros(4 * h, dtype=dtype)
    bias[h : 2 * h] = 1.0  # forget gate opens by default
    return LstmDirectionParams(w_x, w_h, parameter(bias))


def init_layer_params(d: int, h: int, rng: np.random.Generator, dtype=np.float32) -> LstmLayerParams:
    return LstmLayerParams(
        fwd=_init_direction(d, h, rng, dtype),
        bwd=_init_direction(d, h, rng, dtype),
    )


def init_encoder_params(
    k: int, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32
) -> list[LstmLayerParams]:
    return [
        init_layer_params(layer_input_width(k, l, config), config.hidden_size, rng, dtype)
        for l in range(1, config.num_layers + 1)
    ]


def _cell(gates: Tensor, c_prev: Tensor, h: int):
    i = sigmoid(slice_last(gates, 0, h))
    f = sigmoid(slice_last(gates, h, 2 * h))
    g = tanh(slice_last(gates, 2 * h, 3 * h))
    o = sigmoid(slice_last(gates, 3 * h, 4 * h))
    c = add(mul(f, c_prev), mul(i, g))
    return mul(o, tanh(c)), c


def lstm_cell_step(x: Tensor, h_prev: Tensor, c_prev: Tensor, params: LstmDirectionParams):
    """One LSTM step; works on (d,)/(H,) vectors or (B, d)/(B, H) batches."""
    gates = add(add_bias(matmul(x, params.w_x), params.b), matmul(h_prev, params.w_h))
    return _cell(gates, c_prev, params.hidden_size)


def _run_direction(x: Tensor, mask: np.ndarray, params: LstmDirectionParams, reverse: bool):
    """Recurrence over the time axis; returns per-position outputs in sequence order.

    State rows are zeroed wherever the mask is false, so the backward
    direction effectively starts from zero state at each sequence's last
    real token and padded positions emit exact zeros.
    """
    h_size = params.hidden_size
    T = x.data.shape[-2]
    dtype = x.data.dtype
    lead = x.data.shape[:-2]
    gx = add_bias(matmul(x, params.w_x), params.b)  # (..., T, 4H)
    h = tensor(np.zeros(lead + (h_size,), dtype=dtype), dtype=dtype)
    c = tensor(np.zeros(lead + (h_size,), dtype=dtype), dtype=dtype)
    outputs: list = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        gates = add(slice_time(gx, t), matmul(h, params.w_h))
        h, c = _cell(gates, c, h_size)
        m_t = tensor(mask[..., t], dtype=dtype)
        h = scale_rows(h, m_t)
        c = scale_rows(c, m_t)
        outputs[t] = h
    return outputs


def bilstm_layer(x: Tensor, mask, params: LstmLayerParams) -> Tensor:
    """(..., T, d) -> (..., T, 2H): forward and backward passes concatenated."""
    m = np.asarray(mask, dtype=bool)
    if m.shape != x.data.shape[:-1]:
        raise ShapeError(f"bilstm_layer: mask {m.shape} does not match input {x.data.shape}")
    fwd = _run_direction(x, m, params.fwd, reverse=False)
    bwd = _run_direction(x, m, params.bwd, reverse=True)
    return concat_last([stack_time(fwd), stack_time(bwd)])


def encode(
    emb: Tensor,
    mask,
    config: EncoderConfig,
    layers: list[LstmLayerParams],
    rng: np.random.Generator | None = None,
    train: bool = False,
    collect_inputs: list | None = None,
) -> list[Tensor]:
    """Run every layer; returns the list of per-layer (..., T, 2H) outputs.

    At train time each layer's output is dropped out once, before any
    downstream consumer (deeper layers, attention) sees it.
    """
    if len(layers) != config.num_layers:
        raise ValueError(
            f"encoder config expects {config.num_layers} layers, got {len(layers)} parameter sets"
        )
    k = emb.data.shape[-1]
    outputs: list[Tensor] = []
    for l, params in enumerate(layers, start=1):
        if l == 1:
            x = emb
        elif config.residual:
            x = concat_last([emb] + outputs[::-1])
        else:
            x = outputs[-1]
        expected = layer_input_width(k, l, config)
        if params.fwd.input_width != expected or params.bwd.input_width != expected:
            raise ShapeError(
                f"layer {l}: parameter input width {params.fwd.input_width} "
                f"does not match configured width {expected}"
            )
        if collect_inputs is not None:
            collect_inputs.append(x)
        out = bilstm_layer(x, mask, params)
        if train and config.dropout_retention < 1.0:
            if rng is None:
                raise ValueError("encode: training with dropout requires an RNG")
            out = dropout(out, config.dropout_retention, rng)
        outputs.append(out)
    return outputs
