"""Full matcher: embeddings -> recursive encoder -> attention -> pooling -> head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import attention, head
from .autodiff import Tensor, cross_entropy_logits, no_grad, parameter, stable_softmax
from .data import Batch
from .embeddings import LookupEmbedding
from .encoder import EncoderConfig, LstmLayerParams, encode, init_encoder_params
from .vocab import Vocabulary

__all__ = ["ModelConfig", "DreModel", "ForwardResult"]

_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass
class ModelConfig:
    labels: list[str]
    mode: str = "lookup"  # or "contextual"
    embedding_dim: int = 128
    num_layers: int = 3
    hidden_size: int = 128
    residual: bool = True
    dropout_retention: float = 0.5
    head_hidden: int = 256
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if self.mode not in ("lookup", "contextual"):
            raise ValueError(f"unknown embedding mode '{self.mode}'")
        if self.dtype not in _DTYPES:
            raise ValueError(f"unknown dtype '{self.dtype}'")
        if len(self.labels) < 2:
            raise ValueError("need at least 2 labels")

    @property
    def np_dtype(self):
        return _DTYPES[self.dtype]

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            num_layers=self.num_layers,
            hidden_size=self.hidden_size,
            residual=self.residual,
            dropout_retention=self.dropout_retention,
        )

    @property
    def attention_width(self) -> int:
        return attention.attention_input_width(
            self.embedding_dim, self.hidden_size, self.num_layers
        )

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "mode": self.mode,
            "embedding_dim": self.embedding_dim,
            "num_layers": self.num_layers,
            "hidden_size": self.hidden_size,
            "residual": self.residual,
            "dropout_retention": self.dropout_retention,
            "head_hidden": self.head_hidden,
            "seed": self.seed,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class ForwardResult:
    loss: Tensor | None
    logits: Tensor
    probs: np.ndarray  # (B, n)

    @property
    def predictions(self) -> np.ndarray:
        return self.probs.argmax(axis=-1)  # ties resolve to the lowest class index


class DreModel:
    """Parameter registry plus the forward pass over padded batches.

    One RNG, seeded from the config, drives initialization and then the
    training-time dropout masks, so identical configs give bit-identical
    runs. A model instance is single-writer: one training step at a time;
    inference on frozen parameters records no graph and is thread-safe.
    """

    def __init__(self, config: ModelConfig, vocab: Vocabulary | None = None):
        self.config = config
        self.vocab = vocab
        self.rng = np.random.default_rng(config.seed)
        dtype = config.np_dtype
        enc_cfg = config.encoder_config()

        self.embedding: LookupEmbedding | None = None
        if config.mode == "lookup":
            if vocab is None:
                raise ValueError("lookup mode requires a vocabulary")
            self.embedding = LookupEmbedding(len(vocab), config.embedding_dim, self.rng, dtype)

        self.layers: list[LstmLayerParams] = init_encoder_params(
            config.embedding_dim, enc_cfg, self.rng, dtype
        )
        d_att = config.attention_width
        bound = 1.0 / np.sqrt(d_att)
        self.w_a = parameter(self.rng.uniform(-bound, bound, size=(d_att,)).astype(dtype))
        self.head = head.init_head_params(
            2 * d_att, config.head_hidden, config.n_classes, self.rng, dtype
        )
        self.params = self._registry()

    def _registry(self) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        if self.embedding is not None:
            params.update(self.embedding.parameters())
        for l, layer in enumerate(self.layers, start=1):
            for tag, direction in (("fwd", layer.fwd), ("bwd", layer.bwd)):
                params[f"enc.layer{l}.{tag}.w_x"] = direction.w_x
                params[f"enc.layer{l}.{tag}.w_h"] = direction.w_h
                params[f"enc.layer{l}.{tag}.b"] = direction.b
        params["attn.w_a"] = self.w_a
        params["head.w1"] = self.head.w1
        params["head.b1"] = self.head.b1
        params["head.w_o"] = self.head.w_o
        params["head.b_o"] = self.head.b_o
        return params

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def _embed_batch(self, batch: Batch) -> Tensor:
        if self.config.mode == "lookup":
            return self.embedding.embed_ids(batch.token_ids, batch.segment_ids, batch.mask)
        if batch.embeddings is None:
            raise ValueError("contextual mode needs batches built from a contextual store")
        if batch.embeddings.shape[-1] != self.config.embedding_dim:
            raise ValueError(
                f"store vectors have width {batch.embeddings.shape[-1]}, "
                f"model expects {self.config.embedding_dim}"
            )
        return Tensor(batch.embeddings.astype(self.config.np_dtype))

    def forward_batch(self, batch: Batch, train: bool = False) -> ForwardResult:
        emb = self._embed_batch(batch)
        outputs = encode(
            emb,
            batch.mask,
            self.config.encoder_config(),
            self.layers,
            rng=self.rng,
            train=train,
        )
        h_cat = attention.assemble_attention_input(emb, outputs)
        weights = attention.attention_weights(h_cat, self.w_a, batch.mask)
        r = attention.apply_attention(h_cat, weights)
        pooled = attention.pool(r, batch.mask)
        logits = head.head_logits(pooled, self.head)
        loss = None
        if batch.labels is not None:
            loss = cross_entropy_logits(logits, batch.labels)
        return ForwardResult(loss=loss, logits=logits, probs=stable_softmax(logits.data))

    def infer_batch(self, batch: Batch) -> ForwardResult:
        """Inference without graph recording (dropout off, thread-safe)."""
        with no_grad():
            return self.forward_batch(batch, train=False)

    # -- checkpoint plumbing -------------------------------------------------

    def parameter_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]):
        """Overwrite every registered parameter; names and shapes must match."""
        missing = sorted(set(self.params) - set(arrays))
        extra = sorted(set(arrays) - set(self.params))
        if missing or extra:
            raise ValueError(f"parameter name mismatch: missing={missing}, unexpected={extra}")
        for name, arr in arrays.items():
            p = self.params[name]
            if p.data.shape != arr.shape:
                raise ValueError(
                    f"parameter '{name}': checkpoint shape {arr.shape} != model shape {p.data.shape}"
                )
            p.data = arr.astype(p.data.dtype, copy=True)
            p.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}
