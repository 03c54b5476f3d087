"""Vocabulary with fixed reserved ids and frequency-ordered assignment."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .tokenization import tokenize

__all__ = ["Vocabulary", "build_vocabulary", "PAD_ID", "CLS_ID", "SEP_ID", "UNK_ID", "RESERVED_TOKENS"]

RESERVED_TOKENS = ("[PAD]", "[CLS]", "[SEP]", "[UNK]")
PAD_ID, CLS_ID, SEP_ID, UNK_ID = 0, 1, 2, 3


@dataclass
class Vocabulary:
    """token -> id map; ids contiguous from 0, the first four reserved."""

    tokens: list[str]
    min_frequency: int = 1
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if tuple(self.tokens[:4]) != RESERVED_TOKENS:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id_of(self, token: str) -> int:
        """Lookup; unknown tokens map to [UNK]."""
        return self.index.get(token, UNK_ID)

    def ids_of(self, tokens) -> list[int]:
        idx = self.index
        return [idx.get(t, UNK_ID) for t in tokens]


def build_vocabulary(corpus, min_frequency: int = 1) -> Vocabulary:
    """Count tokens over both texts of every pair and assign ids.

    After the four reserved ids, tokens are ordered by (frequency desc,
    token asc), so a rebuild over the same corpus is id-identical.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("build_vocabulary: empty corpus")
    counts: Counter = Counter()
    for ex in corpus:
        counts.update(tokenize(ex.text_a))
        counts.update(tokenize(ex.text_b))
    kept = [
        (tok, c)
        for tok, c in counts.items()
        if c >= min_frequency and tok not in RESERVED_TOKENS
    ]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary(list(RESERVED_TOKENS) + [t for t, _ in kept], min_frequency)
