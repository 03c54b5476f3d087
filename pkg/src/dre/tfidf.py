"""TF-IDF vectors, cosine similarity, and the similarity-band negative miner.

Negative pairs are mined by keeping, for each anchor question, the other
question whose TF-IDF cosine similarity is highest while still inside the
configured band (default [0.10, 0.20]): below it candidates are effectively
random, above it they are too similar to count as negatives.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import PairExample
from .tokenization import tokenize

__all__ = ["TfidfModel", "tfidf_fit", "cosine", "mine_negatives", "DEFAULT_BAND"]

DEFAULT_BAND = (0.10, 0.20)


@dataclass
class TfidfModel:
    """Term ids plus smoothed idf weights: idf = ln((1+N)/(1+df)) + 1."""

    vocabulary: dict[str, int]
    idf: np.ndarray  # float64, one weight per term id

    def vector(self, text: str) -> dict[int, float]:
        """L2-normalized sparse tf-idf vector; empty when nothing is in-vocabulary."""
        weights: dict[int, float] = {}
        for tok in tokenize(text):
            tid = self.vocabulary.get(tok)
            if tid is not None:
                weights[tid] = weights.get(tid, 0.0) + 1.0
        if not weights:
            return {}
        for tid in weights:
            weights[tid] *= self.idf[tid]
        norm = math.sqrt(sum(w * w for w in weights.values()))
        return {tid: w / norm for tid, w in weights.items()}


def tfidf_fit(corpus: list[str]) -> TfidfModel:
    """Fit term ids and idf weights on raw document strings."""
    if not corpus:
        raise ValueError("tfidf_fit: empty corpus")
    df: dict[str, int] = {}
    for doc in corpus:
        for tok in set(tokenize(doc)):
            df[tok] = df.get(tok, 0) + 1
    vocabulary = {tok: i for i, tok in enumerate(sorted(df))}
    n_docs = len(corpus)
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for tok, tid in vocabulary.items():
        idf[tid] = math.log((1.0 + n_docs) / (1.0 + df[tok])) + 1.0
    return TfidfModel(vocabulary, idf)


def cosine(u: dict[int, float], v: dict[int, float]) -> float:
    """Dot product of normalized sparse vectors; zero vectors score 0.0."""
    if not u or not v:
        return 0.0
    if len(v) < len(u):
        u, v = v, u
    return sum(w * v[tid] for tid, w in u.items() if tid in v)


def _worker_count() -> int:
    raw = os.environ.get("DRE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def mine_negatives(
    questions: list[str],
    band: tuple[float, float] = DEFAULT_BAND,
    ids: list[str] | None = None,
    label: str = "not_match",
):
    """Pick one in-band hardest negative per anchor.

    Returns (pairs, unmatched): pairs are PairExamples carrying the negative
    label; anchors with no candidate in the band land in the unmatched
    report (id, best_similarity, reason) instead of being silently paired.
    """
    low, high = band
    if low > high:
        raise ValueError(f"band is inverted: low={low} > high={high}")
    if len(questions) < 2:
        raise ValueError("mine_negatives: need at least 2 questions")
    if ids is None:
        ids = [f"q{i:05d}" for i in range(len(questions))]
    if len(ids) != len(questions):
        raise ValueError("mine_negatives: ids and questions differ in length")

    model = tfidf_fit(questions)
    vectors = [model.vector(q) for q in questions]

    def pick(anchor: int):
        best_in_band = None  # (similarity, candidate index)
        best_overall = 0.0
        for j, vec in enumerate(vectors):
            if j == anchor:
                continue
            sim = cosine(vectors[anchor], vec)
            best_overall = max(best_overall, sim)
            if low <= sim <= high and (best_in_band is None or sim > best_in_band[0]):
                best_in_band = (sim, j)  # strict > keeps the lowest index on ties
        return best_in_band, best_overall

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            picks = list(pool.map(pick, range(len(questions))))
    else:
        picks = [pick(i) for i in range(len(questions))]

    pairs: list[PairExample] = []
    unmatched: list[dict] = []
    for i, (hit, best_overall) in enumerate(picks):
        if hit is None:
            unmatched.append(
                {"id": ids[i], "best_similarity": best_overall, "reason": "no candidate in band"}
            )
            continue
        sim, j = hit
        # post-hoc pass: recompute from raw text, independent of the selection loop
        check = cosine(model.vector(questions[i]), model.vector(questions[j]))
        if not (low <= check <= high):
            raise AssertionError(
                f"mined pair ({ids[i]}, {ids[j]}) re-verified at {check:.6f}, outside [{low}, {high}]"
            )
        pairs.append(PairExample(id=f"neg-{ids[i]}", text_a=questions[i], text_b=questions[j], label=label))
    return pairs, unmatched
