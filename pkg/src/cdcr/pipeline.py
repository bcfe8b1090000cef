"""Glue between stores, pairs, maps, scorers, and the difficulty module.

Ordered-pair sentence vectors for the difficulty cosine are stored as
2H-dimensional pair records: the first H values are the context-encoded
vector of the record's first sentence, the last H the second sentence's.
"""

from __future__ import annotations

import numpy as np

from .corpus import COREFERENT, NON_COREFERENT, Corpus, MentionPair
from .difficulty import CategorizedPair, LabelMeans, categorize_pairs, pair_similarity
from .embedstore import AB, BA, EmbeddingStore, build_pair_representation
from .errors import ValidationError
from .linmap import LinearMap, apply_map
from .scorer import PairScore, ScorerConfig, ScorerParams, forward, init_scorer, train
from .taxonomy import Taxonomy


def representation_matrix(
    store: EmbeddingStore,
    pairs: list[MentionPair],
    modality: str,
    encoder: str,
    pair_fallback: str = "error",
) -> np.ndarray:
    """Stack the 4H representations of both orders of every pair.

    Row layout: 2*i is the AB rep of pairs[i], 2*i + 1 the BA rep.
    """
    rows = []
    for pair in pairs:
        for direction in (AB, BA):
            rep = build_pair_representation(
                store, pair.a, pair.b, direction, modality, encoder, pair_fallback
            )
            rows.append(rep.vec)
    if not rows:
        raise ValidationError("no pairs to build representations for")
    return np.stack(rows)


def train_scorer_on_pairs(
    store: EmbeddingStore,
    pairs: list[MentionPair],
    modality: str,
    encoder: str,
    config: ScorerConfig,
    pair_fallback: str = "error",
) -> tuple[ScorerParams, list[float]]:
    """Train on both directional representations of every labeled pair."""
    unlabeled = [p for p in pairs if p.label not in (COREFERENT, NON_COREFERENT)]
    if unlabeled:
        raise ValidationError(
            f"cannot train on pairs without gold labels (e.g. {unlabeled[0].key})"
        )
    X = representation_matrix(store, pairs, modality, encoder, pair_fallback)
    y = np.repeat([1.0 if p.label == COREFERENT else 0.0 for p in pairs], 2)
    params = init_scorer(config)
    return train(params, (X, y), config)


def score_pairs(
    params: ScorerParams,
    store: EmbeddingStore,
    pairs: list[MentionPair],
    modality: str,
    encoder: str,
    linear_map: LinearMap | None = None,
    pair_fallback: str = "error",
) -> dict[tuple[str, str], PairScore]:
    """Score every pair, optionally after bridging reps through a map."""
    X = representation_matrix(store, pairs, modality, encoder, pair_fallback)
    if linear_map is not None:
        X = apply_map(linear_map, X)
    probs = forward(params, X)
    out: dict[tuple[str, str], PairScore] = {}
    for i, pair in enumerate(pairs):
        out[pair.key] = PairScore(
            pair=pair.key, s_ab=float(probs[2 * i]), s_ba=float(probs[2 * i + 1])
        )
    return out


def sentence_vectors_for(
    store: EmbeddingStore,
    first: str,
    second: str,
    encoder: str,
) -> tuple[np.ndarray, np.ndarray]:
    """Split a 2H ordered-pair sentence record into its two halves."""
    vec = store.pair_vec(first, second, "text", encoder)
    if vec.shape[0] % 2 != 0:
        raise ValidationError(
            f"sentence-pair record for ({first!r}, {second!r}) has odd dim {vec.shape[0]}"
        )
    half = vec.shape[0] // 2
    return vec[:half], vec[half:]


def categorize_corpus_pairs(
    corpus: Corpus,
    pairs: list[MentionPair],
    taxonomy: Taxonomy,
    store: EmbeddingStore,
    sentence_encoder: str,
) -> tuple[list[CategorizedPair], LabelMeans]:
    """Difficulty-score and bucket every candidate pair of one corpus."""
    scored = []
    for pair in pairs:
        comps = pair_similarity(
            pair,
            corpus,
            taxonomy,
            sentence_vectors_for(store, pair.a, pair.b, sentence_encoder),
            sentence_vectors_for(store, pair.b, pair.a, sentence_encoder),
        )
        scored.append((pair, comps))
    return categorize_pairs(scored, corpus_name=corpus.name)
