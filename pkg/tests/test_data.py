"""Tokenizer, dataset loading, and batching contracts."""

import json
from collections import Counter

import numpy as np
import pytest

from dre.data import DatasetError, PairExample, load_dataset, make_batches
from dre.tokenization import tokenize
from dre.vocab import build_vocabulary


def test_tokenize_punctuation_and_case():
    assert tokenize("Is the Sun pure?") == ["is", "the", "sun", "pure", "?"]


def test_tokenize_collapses_whitespace():
    assert tokenize("a  b") == ["a", "b"]
    assert tokenize("  a\t b \n") == ["a", "b"]


def test_tokenize_preserves_every_non_space_character():
    samples = [
        "آیا خورشید پاک کننده است؟",
        "فرق وضو و غسل چیست؟",
        "Hello, world! 123",
        "چرا؟ چون... گفته‌اند",
    ]
    for line in samples:
        tokens = tokenize(line)
        assert "".join(tokens) == "".join(line.lower().split())


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def test_load_jsonl_binary_labels(tmp_path):
    path = tmp_path / "pairs.jsonl"
    _write_jsonl(
        path,
        [
            {"id": "1", "text_a": "a b", "text_b": "b a", "label": "match"},
            {"id": "2", "text_a": "a b", "text_b": "c d", "label": "not-match"},
            {"id": "3", "text_a": "x", "text_b": "x", "label": "match"},
        ],
    )
    examples, labels = load_dataset(path, "jsonl")
    assert len(examples) == 3
    assert labels == ["match", "not-match"]
    assert examples[0].text_b == "b a"


def test_load_tsv_three_classes(tmp_path):
    path = tmp_path / "pairs.tsv"
    rows = [
        ("1", "p q", "q p", "entailment"),
        ("2", "p q", "r s", "contradiction"),
        ("3", "p", "p maybe", "neutral"),
        ("4", "q", "q", "entailment"),
    ]
    path.write_text("\n".join("\t".join(r) for r in rows) + "\n", encoding="utf-8")
    examples, labels = load_dataset(path, "tsv")
    assert len(examples) == 4
    assert labels == ["entailment", "contradiction", "neutral"]


def test_missing_field_reports_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    _write_jsonl(
        path,
        [
            {"id": "1", "text_a": "a", "text_b": "b", "label": "m"},
            {"id": "2", "text_a": "a", "label": "m"},
        ],
    )
    with pytest.raises(DatasetError, match=r"bad\.jsonl:2.*text_b"):
        load_dataset(path, "jsonl")


def test_empty_text_reports_line_number(tmp_path):
    path = tmp_path / "empty.jsonl"
    _write_jsonl(path, [{"id": "1", "text_a": "a", "text_b": "  ", "label": "m"}])
    with pytest.raises(DatasetError, match=r"empty\.jsonl:1.*text_b"):
        load_dataset(path, "jsonl")


def test_unknown_format_errors(tmp_path):
    with pytest.raises(DatasetError, match="unknown dataset format"):
        load_dataset(tmp_path / "x.csv", "csv")


def _examples(n):
    return [PairExample(f"e{i}", f"tok{i} alpha", f"tok{i} beta", "m") for i in range(n)]


def test_batch_sizes_including_partial_tail():
    examples = _examples(10)
    vocab = build_vocabulary(examples)
    batches = make_batches(examples, vocab, batch_size=4, max_len=20, label_map={"m": 0})
    assert [b.size for b in batches] == [4, 4, 2]


def test_shuffle_is_deterministic_under_seed():
    examples = _examples(20)
    vocab = build_vocabulary(examples)
    ids1 = [
        i for b in make_batches(examples, vocab, 4, 20, {"m": 0}, shuffle_seed=5)
        for i in b.example_ids
    ]
    ids2 = [
        i for b in make_batches(examples, vocab, 4, 20, {"m": 0}, shuffle_seed=5)
        for i in b.example_ids
    ]
    ids3 = [
        i for b in make_batches(examples, vocab, 4, 20, {"m": 0}, shuffle_seed=6)
        for i in b.example_ids
    ]
    assert ids1 == ids2
    assert ids1 != ids3


def test_batching_preserves_the_example_multiset():
    examples = _examples(17)
    vocab = build_vocabulary(examples)
    batches = make_batches(examples, vocab, 5, 20, {"m": 0}, shuffle_seed=1)
    flat = [i for b in batches for i in b.example_ids]
    assert Counter(flat) == Counter(ex.id for ex in examples)


def test_max_len_cap_honored():
    # religious-style config: cap at 250 even for very long texts
    long_text = " ".join(f"t{i}" for i in range(300))
    examples = [PairExample("long", long_text, long_text, "m")]
    vocab = build_vocabulary(examples)
    batches = make_batches(examples, vocab, 1, 250, {"m": 0})
    assert batches[0].token_ids.shape[1] == 250
    assert batches[0].mask.sum() == 250


def test_per_batch_padding_to_longest_row():
    examples = [
        PairExample("a", "one", "two", "m"),
        PairExample("b", "one two three four", "five six", "m"),
    ]
    vocab = build_vocabulary(examples)
    (batch,) = make_batches(examples, vocab, 2, 50, {"m": 0})
    assert batch.token_ids.shape[1] == 9  # CLS + 4 + SEP + 2 + SEP
    assert batch.mask[0].sum() == 5
    assert batch.mask[1].sum() == 9


def test_unknown_label_errors():
    examples = [PairExample("a", "x", "y", "weird")]
    vocab = build_vocabulary(examples)
    with pytest.raises(DatasetError, match="weird"):
        make_batches(examples, vocab, 2, 20, {"m": 0})


def test_batch_labels_are_none_without_map():
    examples = _examples(3)
    vocab = build_vocabulary(examples)
    (batch,) = make_batches(examples, vocab, 4, 20, label_map=None)
    assert batch.labels is None
