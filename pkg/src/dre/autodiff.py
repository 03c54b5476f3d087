"""Reverse-mode automatic differentiation over dense numpy arrays.

Eager tape design: each op computes its numpy result immediately and, when
gradients are being tracked, records its parents plus a backward closure on
the output tensor. ``Tensor.backward()`` walks the recorded graph in exact
reverse topological order and accumulates into ``grad`` buffers.

The op set is exactly what the matcher model needs:

* ``matmul`` against a parameter matrix or vector
* ``add`` / ``mul`` (elementwise, strict same shape)
* ``add_bias`` (last-axis broadcast)
* ``concat_last`` / ``slice_last`` (feature-axis assembly and gate splits)
* ``slice_time`` / ``stack_time`` / ``gather_rows`` (structural ops for
  recurrence and trainable lookup tables)
* ``tanh`` / ``sigmoid``
* ``softmax_masked`` (masked logits held at -1e9, masked outputs exactly 0)
* ``dropout`` (inverted scaling, train time only)
* ``masked_max_time`` / ``masked_mean_time`` (pooling over real tokens)
* ``scale_rows`` (per-row scalar scaling, used by attention and masking)
* ``cross_entropy_logits`` (fused, numerically stable softmax + NLL)
* ``sum_all`` (diagnostic reduction)

float32 is the training dtype; build tensors as float64 for gradient checks.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

import numpy as np

__all__ = [
    "ShapeError",
    "Tensor",
    "tensor",
    "parameter",
    "no_grad",
    "matmul",
    "add",
    "mul",
    "add_bias",
    "concat_last",
    "slice_last",
    "slice_time",
    "stack_time",
    "gather_rows",
    "tanh",
    "sigmoid",
    "softmax_masked",
    "dropout",
    "masked_max_time",
    "masked_mean_time",
    "scale_rows",
    "cross_entropy_logits",
    "sum_all",
    "stable_softmax",
]

_MASKED_LOGIT = -1e9


class ShapeError(ValueError):
    """Shapes passed to an op cannot combine; message names the op and both shapes."""


_state = threading.local()


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Disable graph recording in the current thread (inference mode)."""
    prev = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


class Tensor:
    """Dense n-d array plus an optional slot in the backward graph.

    ``grad`` matches ``data``'s shape once gradients have been accumulated;
    leaf parameters get a zero buffer eagerly so untouched parameters read
    as exactly-zero gradients.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, op: str = "leaf"):
        self.data = np.asarray(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.op = op
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)
        else:
            self.grad = None

    def backward(self):
        """Accumulate gradients of this scalar into every reachable tensor."""
        if self.data.size != 1:
            raise ValueError(
                f"backward: loss must be a scalar, got shape {self.data.shape}"
            )
        order = _topo_order(self)
        _accum(self, np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self.op!r}, requires_grad={self.requires_grad})"


def _topo_order(root: Tensor) -> list:
    """Iterative post-order over the recorded graph (parents before consumers)."""
    order = []
    state = {}  # id -> 1 discovered, 2 finished
    stack = [root]
    while stack:
        node = stack[-1]
        st = state.get(id(node), 0)
        if st == 0:
            state[id(node)] = 1
            for p in node._parents:
                if p.requires_grad and state.get(id(p), 0) == 0:
                    stack.append(p)
        else:
            stack.pop()
            if st == 1:
                state[id(node)] = 2
                order.append(node)
    return order


def _accum(t: Tensor, g) -> None:
    if t.requires_grad:
        if t.grad is None:
            t.grad = np.zeros_like(t.data)
        t.grad += g


def _track(*tensors) -> bool:
    return _grad_enabled() and any(t.requires_grad for t in tensors)


def tensor(data, dtype=np.float32) -> Tensor:
    """Constant tensor (no gradient)."""
    return Tensor(np.asarray(data, dtype=dtype))


def parameter(data, dtype=None) -> Tensor:
    """Trainable leaf with an eagerly allocated zero gradient buffer."""
    arr = np.array(data, dtype=dtype, copy=True)
    t = Tensor(arr, requires_grad=True, op="param")
    t.grad = np.zeros_like(arr)
    return t


# ---------------------------------------------------------------------------
# primitive ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """``(..., k) @ (k, n) -> (..., n)`` or ``(..., k) @ (k,) -> (...)``."""
    ad, bd = a.data, b.data
    if bd.ndim not in (1, 2):
        raise ShapeError(f"matmul: right operand must have rank 1 or 2, got {bd.shape}")
    k = bd.shape[0]
    if ad.ndim < 1 or ad.shape[-1] != k:
        raise ShapeError(f"matmul: cannot combine {ad.shape} with {bd.shape}")
    out = Tensor(ad @ bd, _track(a, b), "matmul")
    if out.requires_grad:
        out._parents = (a, b)

        def bw(g):
            if bd.ndim == 2:
                if a.requires_grad:
                    _accum(a, g @ bd.T)
                if b.requires_grad:
                    n = bd.shape[1]
                    _accum(b, ad.reshape(-1, k).T @ g.reshape(-1, n))
            else:
                if a.requires_grad:
                    _accum(a, g[..., None] * bd)
                if b.requires_grad:
                    _accum(b, (ad * g[..., None]).reshape(-1, k).sum(axis=0))

        out._backward = bw
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add: shapes differ {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data + b.data, _track(a, b), "add")
    if out.requires_grad:
        out._parents = (a, b)

        def bw(g):
            _accum(a, g)
            _accum(b, g)

        out._backward = bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul: shapes differ {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data * b.data, _track(a, b), "mul")
    if out.requires_grad:
        out._parents = (a, b)

        def bw(g):
            _accum(a, g * b.data)
            _accum(b, g * a.data)

        out._backward = bw
    return out


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """Broadcast a rank-1 bias over the last axis of ``x``."""
    if b.data.ndim != 1 or x.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(f"add_bias: bias {b.data.shape} does not fit {x.data.shape}")
    n = b.data.shape[0]
    out = Tensor(x.data + b.data, _track(x, b), "add_bias")
    if out.requires_grad:
        out._parents = (x, b)

        def bw(g):
            _accum(x, g)
            if b.requires_grad:
                _accum(b, g.reshape(-1, n).sum(axis=0))

        out._backward = bw
    return out


def concat_last(parts: list) -> Tensor:
    """Concatenate along the last axis; gradient splits exactly back."""
    if not parts:
        raise ShapeError("concat_last: no inputs")
    lead = parts[0].data.shape[:-1]
    for p in parts:
        if p.data.shape[:-1] != lead:
            raise ShapeError(
                f"concat_last: leading dims differ {p.data.shape} vs {parts[0].data.shape}"
            )
    widths = [p.data.shape[-1] for p in parts]
    out = Tensor(np.concatenate([p.data for p in parts], axis=-1), _track(*parts), "concat_last")
    if out.requires_grad:
        out._parents = tuple(parts)

        def bw(g):
            off = 0
            for p, w in zip(parts, widths):
                _accum(p, g[..., off : off + w])
                off += w

        out._backward = bw
    return out


def slice_last(x: Tensor, lo: int, hi: int) -> Tensor:
    n = x.data.shape[-1]
    if not (0 <= lo < hi <= n):
        raise ShapeError(f"slice_last: [{lo}:{hi}] out of range for width {n}")
    out = Tensor(x.data[..., lo:hi], _track(x), "slice_last")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            x.grad[..., lo:hi] += g

        out._backward = bw
    return out


def slice_time(x: Tensor, t: int) -> Tensor:
    """Select position ``t`` on the time axis: ``(..., T, d) -> (..., d)``."""
    if x.data.ndim < 2:
        raise ShapeError(f"slice_time: need rank >= 2, got {x.data.shape}")
    T = x.data.shape[-2]
    if not (0 <= t < T):
        raise ShapeError(f"slice_time: t={t} out of range for T={T}")
    out = Tensor(x.data[..., t, :], _track(x), "slice_time")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            x.grad[..., t, :] += g

        out._backward = bw
    return out


def stack_time(parts: list) -> Tensor:
    """Stack T tensors of shape ``(..., d)`` into ``(..., T, d)``."""
    if not parts:
        raise ShapeError("stack_time: no inputs")
    shape = parts[0].data.shape
    for p in parts:
        if p.data.shape != shape:
            raise ShapeError(f"stack_time: shapes differ {p.data.shape} vs {shape}")
    out = Tensor(np.stack([p.data for p in parts], axis=-2), _track(*parts), "stack_time")
    if out.requires_grad:
        out._parents = tuple(parts)

        def bw(g):
            for t, p in enumerate(parts):
                _accum(p, g[..., t, :])

        out._backward = bw
    return out


def gather_rows(table: Tensor, ids) -> Tensor:
    """Row lookup ``table[ids]``; gradient scatter-adds into the table."""
    idx = np.asarray(ids)
    if table.data.ndim != 2:
        raise ShapeError(f"gather_rows: table must be rank 2, got {table.data.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise ValueError(
            f"gather_rows: id out of range [0, {table.data.shape[0]}): "
            f"min={idx.min()}, max={idx.max()}"
        )
    out = Tensor(table.data[idx], _track(table), "gather_rows")
    if out.requires_grad:
        out._parents = (table,)

        def bw(g):
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            np.add.at(table.grad, idx, g)

        out._backward = bw
    return out


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = Tensor(y, _track(x), "tanh")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            _accum(x, g * (1.0 - y * y))

        out._backward = bw
    return out


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    y = np.empty_like(xd)
    pos = xd >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-xd[pos]))
    ex = np.exp(xd[~pos])
    y[~pos] = ex / (1.0 + ex)
    out = Tensor(y, _track(x), "sigmoid")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            _accum(x, g * y * (1.0 - y))

        out._backward = bw
    return out


def softmax_masked(logits: Tensor, mask) -> Tensor:
    """Softmax over the last axis restricted to unmasked positions.

    Masked logits are held at -1e9 (finite in float32); masked outputs are
    exactly zero. A row with no unmasked position is an error.
    """
    ld = logits.data
    m = np.asarray(mask, dtype=bool)
    if m.shape != ld.shape:
        raise ShapeError(f"softmax_masked: mask {m.shape} does not match logits {ld.shape}")
    if not m.any(axis=-1).all():
        raise ValueError("softmax_masked: a row has no unmasked positions")
    z = np.where(m, ld, ld.dtype.type(_MASKED_LOGIT))
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z) * m
    p = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(p, _track(logits), "softmax_masked")
    if out.requires_grad:
        out._parents = (logits,)

        def bw(g):
            s = (g * p).sum(axis=-1, keepdims=True)
            _accum(logits, (g - s) * p)

        out._backward = bw
    return out


def dropout(x: Tensor, retention: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: keep with probability ``retention``, scale by 1/retention."""
    if not (0.0 < retention <= 1.0):
        raise ValueError(f"dropout: retention must be in (0, 1], got {retention}")
    if retention >= 1.0:
        return x
    keep = rng.random(x.data.shape) < retention
    scale = keep.astype(x.data.dtype) / x.data.dtype.type(retention)
    out = Tensor(x.data * scale, _track(x), "dropout")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            _accum(x, g * scale)

        out._backward = bw
    return out


def _check_time_mask(x: Tensor, mask) -> np.ndarray:
    m = np.asarray(mask, dtype=bool)
    if x.data.ndim < 2 or m.shape != x.data.shape[:-1]:
        raise ShapeError(
            f"time mask {m.shape} does not match sequence tensor {x.data.shape}"
        )
    if not m.any(axis=-1).all():
        raise ValueError("masked pooling: a sequence has no unmasked positions")
    return m


def masked_max_time(x: Tensor, mask) -> Tensor:
    """Elementwise max over unmasked time positions: ``(..., T, d) -> (..., d)``."""
    m = _check_time_mask(x, mask)
    z = np.where(m[..., None], x.data, -np.inf)
    idx = z.argmax(axis=-2)  # first argmax on ties
    out_data = np.take_along_axis(x.data, idx[..., None, :], axis=-2).squeeze(-2)
    out = Tensor(out_data, _track(x), "masked_max_time")
    if out.requires_grad:
        out._parents = (x,)
        T = x.data.shape[-2]

        def bw(g):
            sel = idx[..., None, :] == np.arange(T).reshape((T, 1))
            _accum(x, sel * g[..., None, :])

        out._backward = bw
    return out


def masked_mean_time(x: Tensor, mask) -> Tensor:
    """Mean over unmasked time positions; divisor is the true length."""
    m = _check_time_mask(x, mask)
    lens = m.sum(axis=-1).astype(x.data.dtype)
    mf = m.astype(x.data.dtype)
    out_data = (x.data * mf[..., None]).sum(axis=-2) / lens[..., None]
    out = Tensor(out_data, _track(x), "masked_mean_time")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            _accum(x, mf[..., None] * (g / lens[..., None])[..., None, :])

        out._backward = bw
    return out


def scale_rows(x: Tensor, s: Tensor) -> Tensor:
    """Scale each last-axis row of ``x`` by the matching scalar in ``s``."""
    if s.data.shape != x.data.shape[:-1]:
        raise ShapeError(
            f"scale_rows: scales {s.data.shape} do not match rows of {x.data.shape}"
        )
    out = Tensor(x.data * s.data[..., None], _track(x, s), "scale_rows")
    if out.requires_grad:
        out._parents = (x, s)

        def bw(g):
            if x.requires_grad:
                _accum(x, g * s.data[..., None])
            if s.requires_grad:
                _accum(s, (g * x.data).sum(axis=-1))

        out._backward = bw
    return out


def cross_entropy_logits(logits: Tensor, labels) -> Tensor:
    """Fused stable softmax + cross-entropy, averaged over the batch.

    ``logits`` is (B, n); ``labels`` an int array (B,). The gradient w.r.t.
    the logits is ``(softmax - one_hot) / B``.
    """
    ld = logits.data
    if ld.ndim != 2:
        raise ShapeError(f"cross_entropy_logits: logits must be rank 2, got {ld.shape}")
    lab = np.asarray(labels)
    if lab.shape != (ld.shape[0],):
        raise ShapeError(
            f"cross_entropy_logits: labels {lab.shape} do not match logits {ld.shape}"
        )
    n = ld.shape[1]
    if lab.size and (lab.min() < 0 or lab.max() >= n):
        raise ValueError(f"cross_entropy_logits: label out of range [0, {n})")
    rows = np.arange(ld.shape[0])
    z = ld - ld.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - lse
    losses = -logp[rows, lab]
    out = Tensor(np.asarray(losses.mean(), dtype=ld.dtype), _track(logits), "cross_entropy")
    if out.requires_grad:
        out._parents = (logits,)
        probs = np.exp(logp)
        B = ld.shape[0]

        def bw(g):
            d = probs.copy()
            d[rows, lab] -= 1.0
            _accum(logits, d * (g / B))

        out._backward = bw
    return out


def sum_all(x: Tensor) -> Tensor:
    """Sum of every element, as a scalar tensor."""
    out = Tensor(np.asarray(x.data.sum(), dtype=x.data.dtype), _track(x), "sum_all")
    if out.requires_grad:
        out._parents = (x,)

        def bw(g):
            _accum(x, np.broadcast_to(g, x.data.shape))

        out._backward = bw
    return out


def stable_softmax(logits: np.ndarray) -> np.ndarray:
    """Plain numpy softmax over the last axis (inference helper, no graph)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
