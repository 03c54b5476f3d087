"""Joint pair sequences for the builtin encoder.

Mirrors the matcher's documented policy: lowercase, split punctuation into
standalone tokens, assemble [CLS] q .. [SEP] p .. [SEP], and when the pair
exceeds max_len drop tokens from the longer side one at a time (ties trim
the pair side). Hugging-Face tokenizers implement the same longest-first
rule natively, so the transformers backend delegates to them.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

CLS, SEP = "[CLS]", "[SEP]"


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def joint_tokens(text_a: str, text_b: str, max_len: int) -> list[str]:
    """Token stream [CLS] a.. [SEP] b.. [SEP], truncated longest-first."""
    if max_len < 5:
        raise ValueError(f"max_len must be >= 5, got {max_len}")
    q = tokenize(text_a)
    p = tokenize(text_b)
    if not q or not p:
        raise ValueError("both texts must tokenize to at least one token")
    while len(q) + len(p) + 3 > max_len:
        if len(q) > len(p):
            q.pop()
        else:
            p.pop()
    return [CLS] + q + [SEP] + p + [SEP]
