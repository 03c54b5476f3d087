"""Whitespace/punctuation tokenizer shared by datasets, vocab, and TF-IDF."""

from __future__ import annotations

import re

__all__ = ["tokenize"]

# a run of word characters, or any single non-word non-space character
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word runs and standalone punctuation marks.

    Deterministic; empty or whitespace-only input yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())
