"""Dataset I/O and batching with padding masks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import ContextualStore
from .sequence import build_joint_sequence
from .tokenization import tokenize
from .vocab import Vocabulary

__all__ = ["PairExample", "DatasetError", "load_dataset", "Batch", "make_batches", "make_contextual_batches"]

_FIELDS = ("id", "text_a", "text_b", "label")


class DatasetError(ValueError):
    pass


@dataclass
class PairExample:
    id: str
    text_a: str
    text_b: str
    label: str


def _validate(ex: PairExample, where: str) -> PairExample:
    if not ex.text_a.strip():
        raise DatasetError(f"{where}: empty text_a")
    if not ex.text_b.strip():
        raise DatasetError(f"{where}: empty text_b")
    if not ex.label.strip():
        raise DatasetError(f"{where}: empty label")
    return ex


def load_dataset(path, fmt: str = "jsonl"):
    """Read pair examples; returns (examples, labels in first-appearance order)."""
    if fmt not in ("jsonl", "tsv"):
        raise DatasetError(f"unknown dataset format '{fmt}' (expected jsonl or tsv)")
    examples: list[PairExample] = []
    labels: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            if fmt == "jsonl":
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DatasetError(f"{where}: invalid json ({e.msg})") from None
                for name in _FIELDS:
                    if name not in record:
                        raise DatasetError(f"{where}: missing field '{name}'")
                ex = PairExample(*(str(record[name]) for name in _FIELDS))
            else:
                cols = line.split("\t")
                if len(cols) != len(_FIELDS):
                    raise DatasetError(
                        f"{where}: expected {len(_FIELDS)} tab-separated columns, got {len(cols)}"
                    )
                ex = PairExample(*cols)
            examples.append(_validate(ex, where))
            if ex.label not in labels:
                labels.append(ex.label)
    return examples, labels


@dataclass
class Batch:
    """Same-length padded rows; ``embeddings`` is set only in contextual mode."""

    token_ids: np.ndarray  # (B, T) int64
    segment_ids: np.ndarray  # (B, T) int64
    mask: np.ndarray  # (B, T) bool
    labels: np.ndarray | None  # (B,) int64
    example_ids: list[str] = field(default_factory=list)
    embeddings: np.ndarray | None = None  # (B, T, k) float32

    @property
    def size(self) -> int:
        return self.mask.shape[0]


def _ordered(examples, shuffle_seed):
    if shuffle_seed is None:
        return list(examples)
    order = np.random.default_rng(shuffle_seed).permutation(len(examples))
    return [examples[i] for i in order]


def _label_ids(chunk, label_map):
    ids = []
    for ex in chunk:
        if ex.label not in label_map:
            raise DatasetError(f"example '{ex.id}': label '{ex.label}' not in the model's label set")
        ids.append(label_map[ex.label])
    return np.asarray(ids, dtype=np.int64)


def make_batches(
    examples,
    vocab: Vocabulary,
    batch_size: int,
    max_len: int,
    label_map: dict[str, int] | None,
    shuffle_seed: int | None = None,
) -> list[Batch]:
    """Tokenize, build joint sequences, and pad per batch to the longest row.

    The shuffle is deterministic under the seed; the final partial batch is
    kept; no example is dropped.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    ordered = _ordered(examples, shuffle_seed)
    batches = []
    for start in range(0, len(ordered), batch_size):
        chunk = ordered[start : start + batch_size]
        seqs = []
        for ex in chunk:
            q, p = tokenize(ex.text_a), tokenize(ex.text_b)
            if not q or not p:
                raise DatasetError(f"example '{ex.id}': text tokenizes to nothing")
            seqs.append(build_joint_sequence(q, p, vocab, max_len, pad_to=0))
        T = max(s.true_length for s in seqs)
        padded = [s.padded(T) for s in seqs]
        batches.append(
            Batch(
                token_ids=np.asarray([s.token_ids for s in padded], dtype=np.int64),
                segment_ids=np.asarray([s.segment_ids for s in padded], dtype=np.int64),
                mask=np.asarray([s.mask for s in padded], dtype=bool),
                labels=None if label_map is None else _label_ids(chunk, label_map),
                example_ids=[ex.id for ex in chunk],
            )
        )
    return batches


def make_contextual_batches(
    examples,
    store: ContextualStore,
    batch_size: int,
    max_len: int,
    label_map: dict[str, int] | None,
    shuffle_seed: int | None = None,
) -> list[Batch]:
    """Batches whose rows are frozen store matrices; masks follow store lengths."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    ordered = _ordered(examples, shuffle_seed)
    batches = []
    for start in range(0, len(ordered), batch_size):
        chunk = ordered[start : start + batch_size]
        mats = [store.embed(ex.id)[:max_len] for ex in chunk]
        T = max(m.shape[0] for m in mats)
        B = len(chunk)
        emb = np.zeros((B, T, store.dim), dtype=np.float32)
        mask = np.zeros((B, T), dtype=bool)
        for i, m in enumerate(mats):
            emb[i, : m.shape[0]] = m
            mask[i, : m.shape[0]] = True
        batches.append(
            Batch(
                token_ids=np.zeros((B, T), dtype=np.int64),
                segment_ids=np.zeros((B, T), dtype=np.int64),
                mask=mask,
                labels=None if label_map is None else _label_ids(chunk, label_map),
                example_ids=[ex.id for ex in chunk],
                embeddings=emb,
            )
        )
    return batches
