"""Shared helpers: synthetic matching corpora and tiny train configs."""

import random

import pytest

from dre.config import TrainConfig
from dre.data import PairExample


def make_toy_matching_set(n_pairs: int = 64, seed: int = 0, vocab_size: int = 30):
    """Deterministic word-overlap matching set.

    Matching pairs share the same word multiset (shuffled); non-matching
    pairs draw a different word sample. Labels in first-appearance order:
    ["match", "not_match"].
    """
    rng = random.Random(seed)
    words = [f"w{i:02d}" for i in range(vocab_size)]
    examples = []
    for i in range(n_pairs):
        base = rng.sample(words, rng.randint(3, 6))
        if i % 2 == 0:
            other = base[:]
            rng.shuffle(other)
            label = "match"
        else:
            other = rng.sample(words, rng.randint(3, 6))
            while set(other) == set(base):
                other = rng.sample(words, rng.randint(3, 6))
            label = "not_match"
        examples.append(
            PairExample(f"ex{i:03d}", " ".join(base), " ".join(other), label)
        )
    return examples, ["match", "not_match"]


def tiny_train_config(**overrides) -> TrainConfig:
    """Small-but-real training config for fast tests."""
    base = dict(
        mode="lookup",
        seed=11,
        embedding_dim=16,
        num_layers=2,
        hidden_size=8,
        residual=True,
        dropout_retention=0.8,
        head_hidden=16,
        learning_rate=1e-3,
        batch_size=8,
        max_epochs=2,
        patience=0,
        max_len=40,
    )
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture
def toy_set():
    return make_toy_matching_set()
