"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, no_grad
from .data import Batch
from .model import DreModel, ModelConfig
from .vocab import RESERVED_TOKENS, Vocabulary

__all__ = ["grad_check", "build_tiny_matcher"]


def grad_check(
    loss_fn,
    params: dict[str, Tensor],
    eps: float = 3e-4,
    samples_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic and numeric gradients.

    ``loss_fn`` recomputes the scalar loss from the current parameter
    values; it must be deterministic (float64 parameters, dropout off).
    Error per coordinate is |analytic - numeric| / max(|analytic|,
    |numeric|, 1e-8); coordinates are sampled per parameter when
    ``samples_per_param`` is set, else all are checked.

    The default eps balances two float64 limits: the loss difference
    cancels to ~ulp(loss)/(2*eps), which must stay below tolerance against
    the 1e-8 denominator floor (pushes eps up), while truncation error
    grows as eps^2 (pushes eps down). eps near 3e-4 sits in the measured
    sweet spot for this model family; much smaller values drown
    small-gradient coordinates in rounding noise.
    """
    for p in params.values():
        p.zero_grad()
    loss_fn().backward()
    analytic = {name: p.grad.copy() for name, p in params.items()}

    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for name, p in params.items():
        flat = p.data.reshape(-1)
        size = flat.size
        if samples_per_param is None or size <= samples_per_param:
            coords = range(size)
        else:
            coords = sorted(rng.choice(size, size=samples_per_param, replace=False).tolist())
        a_flat = analytic[name].reshape(-1)
        for idx in coords:
            orig = flat[idx]
            with no_grad():
                flat[idx] = orig + eps
                lo_hi = float(loss_fn().data)
                flat[idx] = orig - eps
                lo_lo = float(loss_fn().data)
            flat[idx] = orig
            numeric = (lo_hi - lo_lo) / (2.0 * eps)
            a = float(a_flat[idx])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst


def build_tiny_matcher(
    k: int = 8,
    hidden: int = 4,
    layers: int = 3,
    n_classes: int = 3,
    seq_len: int = 3,
    batch: int = 2,
    head_hidden: int = 8,
    residual: bool = True,
    seed: int = 7,
):
    """A float64 matcher at toy dimensions plus a fixed random batch.

    Returns (loss_fn, params, model); loss_fn runs the whole forward pass
    with dropout off, suitable for grad_check.

    Max pooling makes the loss piecewise smooth: if a pooling argmax sits
    within one finite-difference step of flipping for some probe batch, the
    numeric estimate there is invalid regardless of eps. The default
    (seed, dims) probe point is known-smooth; when checking other shapes,
    expect to try another seed if a kink coordinate shows an O(1) error.
    """
    vocab_tokens = list(RESERVED_TOKENS) + [f"w{i}" for i in range(8)]
    vocab = Vocabulary(vocab_tokens)
    config = ModelConfig(
        labels=[f"c{i}" for i in range(n_classes)],
        mode="lookup",
        embedding_dim=k,
        num_layers=layers,
        hidden_size=hidden,
        residual=residual,
        dropout_retention=1.0,
        head_hidden=head_hidden,
        seed=seed,
        dtype="float64",
    )
    model = DreModel(config, vocab)

    rng = np.random.default_rng(seed + 1)
    token_ids = rng.integers(4, len(vocab), size=(batch, seq_len))
    segment_ids = rng.integers(0, 2, size=(batch, seq_len))
    mask = np.ones((batch, seq_len), dtype=bool)
    if batch > 1 and seq_len > 1:
        mask[-1, -1] = False  # exercise the padding path
    labels = rng.integers(0, n_classes, size=(batch,))
    b = Batch(
        token_ids=token_ids,
        segment_ids=segment_ids,
        mask=mask,
        labels=labels,
        example_ids=[f"gc{i}" for i in range(batch)],
    )

    def loss_fn() -> Tensor:
        return model.forward_batch(b, train=False).loss

    return loss_fn, model.params, model
