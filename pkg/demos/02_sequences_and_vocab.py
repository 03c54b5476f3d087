"""From raw text pairs to padded joint sequences: [CLS] q .. [SEP] p .. [SEP]."""

from dre.data import PairExample
from dre.sequence import build_joint_sequence
from dre.tokenization import tokenize
from dre.vocab import build_vocabulary

corpus = [
    PairExample("1", "Is the sun a purifier?", "Does sunlight purify things?", "match"),
    PairExample("2", "Is the sun a purifier?", "How deep is the sea?", "not_match"),
]

print("tokens:", tokenize(corpus[0].text_a))

vocab = build_vocabulary(corpus, min_frequency=1)
print(f"vocabulary ({len(vocab)} entries):", vocab.tokens)

# The joint sequence holds both sides, a segment id per position (0 = question
# side including the first [SEP], 1 = pair side), and a padding mask.
seq = build_joint_sequence(
    tokenize(corpus[0].text_a), tokenize(corpus[0].text_b), vocab, max_len=20
)
print("token ids: ", seq.token_ids)
print("segments:  ", seq.segment_ids)
print("mask:      ", [int(m) for m in seq.mask])
print("true length:", seq.true_length)

# Over-long pairs lose tokens from the longer side first, never the specials.
long_q = [f"q{i}" for i in range(200)]
long_p = [f"p{i}" for i in range(200)]
wide_vocab = build_vocabulary(
    [PairExample("x", " ".join(long_q), " ".join(long_p), "m")]
)
trimmed = build_joint_sequence(long_q, long_p, wide_vocab, max_len=100)
print("400 tokens squeezed into", trimmed.true_length, "positions")
