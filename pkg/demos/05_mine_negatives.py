"""Similarity-band negative mining: hard but safe negatives via TF-IDF cosine."""

import numpy as np

from dre.tfidf import cosine, mine_negatives, tfidf_fit

rng = np.random.default_rng(3)
topics = {
    "prayer": ["prayer", "pray", "worship", "kneel", "dawn"],
    "fasting": ["fast", "fasting", "sunset", "meal", "month"],
    "charity": ["charity", "give", "poor", "wealth", "share"],
}
fillers = [f"word{i}" for i in range(40)]

questions = []
for _ in range(30):
    topic = rng.choice(list(topics))
    core = rng.choice(topics[topic], size=2, replace=False).tolist()
    pad = rng.choice(fillers, size=rng.integers(3, 7), replace=False).tolist()
    questions.append(" ".join(core + pad))

# The band keeps candidates that are similar enough to be hard negatives but
# dissimilar enough to be safely non-matching: below 0.10 is random noise,
# above 0.20 risks true paraphrases.
pairs, unmatched = mine_negatives(questions, band=(0.10, 0.20))
print(f"{len(pairs)} anchors matched, {len(unmatched)} left unmatched\n")

model = tfidf_fit(questions)
for p in pairs[:5]:
    sim = cosine(model.vector(p.text_a), model.vector(p.text_b))
    print(f"  cosine {sim:.3f}")
    print(f"    anchor:   {p.text_a}")
    print(f"    negative: {p.text_b}")

if unmatched:
    print("\nunmatched anchors report best similarity and the reason:")
    print(" ", unmatched[0])
