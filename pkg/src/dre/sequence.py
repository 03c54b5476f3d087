"""Joint question-pair token sequences: [CLS] q .. [SEP] p .. [SEP] + padding."""

from __future__ import annotations

from dataclasses import dataclass

from .vocab import CLS_ID, PAD_ID, SEP_ID, Vocabulary

__all__ = ["TokenSequence", "build_joint_sequence", "MIN_JOINT_LEN"]

# [CLS] + one question token + [SEP] + one pair token + [SEP]
MIN_JOINT_LEN = 5


@dataclass
class TokenSequence:
    """Padded joint sequence with segment ids and a validity mask.

    The mask is true on exactly the first ``true_length`` positions; segment
    ids are 0 through the first [SEP] and 1 afterwards.
    """

    token_ids: list[int]
    segment_ids: list[int]
    mask: list[bool]
    true_length: int

    def __len__(self) -> int:
        return len(self.token_ids)

    def padded(self, length: int) -> "TokenSequence":
        """Copy, padded (or already long enough) to ``length`` positions."""
        if length < len(self.token_ids):
            raise ValueError(
                f"cannot pad to {length}: sequence already has {len(self.token_ids)} positions"
            )
        extra = length - len(self.token_ids)
        return TokenSequence(
            token_ids=self.token_ids + [PAD_ID] * extra,
            segment_ids=self.segment_ids + [0] * extra,
            mask=self.mask + [False] * extra,
            true_length=self.true_length,
        )


def build_joint_sequence(
    q_tokens,
    p_tokens,
    vocab: Vocabulary,
    max_len: int,
    pad_to: int | None = None,
) -> TokenSequence:
    """Assemble [CLS] q.. [SEP] p.. [SEP] within ``max_len`` positions.

    When the pair does not fit, the longer side loses tokens from its end
    one at a time (ties trim the pair side), so both special tokens and at
    least one token per side always survive. Pads to ``max_len`` positions
    by default; pass ``pad_to`` to pad to another length, or 0 to leave the
    sequence unpadded (batching pads later, to the batch's longest row).
    """
    if max_len < MIN_JOINT_LEN:
        raise ValueError(f"max_len must be >= {MIN_JOINT_LEN}, got {max_len}")
    if not q_tokens:
        raise ValueError("build_joint_sequence: empty question token list")
    if not p_tokens:
        raise ValueError("build_joint_sequence: empty pair token list")
    q = list(q_tokens)
    p = list(p_tokens)
    while len(q) + len(p) + 3 > max_len:
        if len(q) > len(p):
            q.pop()
        else:
            p.pop()
    ids = [CLS_ID] + vocab.ids_of(q) + [SEP_ID] + vocab.ids_of(p) + [SEP_ID]
    segments = [0] * (len(q) + 2) + [1] * (len(p) + 1)
    true_length = len(ids)
    seq = TokenSequence(ids, segments, [True] * true_length, true_length)
    target = max_len if pad_to is None else pad_to
    return seq.padded(target) if target > true_length else seq
