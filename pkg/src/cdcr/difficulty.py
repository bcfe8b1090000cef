"""Semantic/discourse difficulty scoring and easy/hard categorization.

A pair's similarity total is the sum of four components: same-topic
(0/1), same-document (0/1), Wu-Palmer similarity of the trigger lemmas,
and the mean cosine of the cross-encoded sentence vectors over both
orderings. Positives above the positive-label mean are easy, negatives
above the negative-label mean are hard; ties fall to the "else" branch
(hard_pos / easy_neg) because the comparison is strictly greater-than.
Categories are an evaluation/routing tool only; nothing here feeds
scorer training or map fitting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import COREFERENT, NON_COREFERENT, Corpus, MentionPair
from .errors import ValidationError
from .taxonomy import Taxonomy, wu_palmer

EASY_POS = "easy_pos"
HARD_POS = "hard_pos"
EASY_NEG = "easy_neg"
HARD_NEG = "hard_neg"
CATEGORIES = (EASY_POS, HARD_POS, EASY_NEG, HARD_NEG)
HARD_CATEGORIES = frozenset({HARD_POS, HARD_NEG})

CSV_COLUMNS = (
    "pair_a", "pair_b", "label", "same_topic", "same_doc",
    "wu_palmer", "cosine", "total", "category",
)


@dataclass(frozen=True)
class SimilarityComponents:
    same_topic: int
    same_doc: int
    wu_palmer: float
    cosine_bidir: float

    @property
    def total(self) -> float:
        return self.same_topic + self.same_doc + self.wu_palmer + self.cosine_bidir


@dataclass(frozen=True)
class LabelMeans:
    mean_pos: float
    mean_neg: float
    corpus: str = ""


@dataclass(frozen=True)
class CategorizedPair:
    pair: MentionPair
    components: SimilarityComponents
    category: str


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine undefined for a zero-norm sentence vector")
    return float(u @ v / (nu * nv))


def pair_similarity(
    pair: MentionPair,
    corpus: Corpus,
    taxonomy: Taxonomy,
    sent_vec_ab: tuple[np.ndarray, np.ndarray],
    sent_vec_ba: tuple[np.ndarray, np.ndarray],
) -> SimilarityComponents:
    """Compute the four-component similarity for one candidate pair.

    `sent_vec_ab` holds the two context-encoded sentence vectors for the
    (a, b) ordering (a's vector first); `sent_vec_ba` likewise for
    (b, a). Each ordering contributes one cosine and the two are
    averaged, which makes the result symmetric under pair swap.
    """
    ma = corpus.mention(pair.a)
    mb = corpus.mention(pair.b)
    cos_ab = _cosine(*sent_vec_ab)
    cos_ba = _cosine(*sent_vec_ba)
    return SimilarityComponents(
        same_topic=1 if pair.same_topic else 0,
        same_doc=1 if pair.same_doc else 0,
        wu_palmer=wu_palmer(taxonomy, ma.trigger_lemma, mb.trigger_lemma),
        cosine_bidir=(cos_ab + cos_ba) / 2.0,
    )


def label_means(labeled_totals, corpus_name: str = "") -> LabelMeans:
    """Arithmetic mean of similarity totals per gold label."""
    pos: list[float] = []
    neg: list[float] = []
    for label, total in labeled_totals:
        if label == COREFERENT:
            pos.append(total)
        elif label == NON_COREFERENT:
            neg.append(total)
        else:
            raise ValidationError(f"cannot compute label means over label {label!r}")
    if not pos or not neg:
        raise ValidationError(
            f"need at least one pair of each label (got {len(pos)} positive, {len(neg)} negative)"
        )
    return LabelMeans(
        mean_pos=sum(pos) / len(pos),
        mean_neg=sum(neg) / len(neg),
        corpus=corpus_name,
    )


def categorize(total: float, label: str, means: LabelMeans) -> str:
    """Bucket one labeled pair; strictly-greater comparison, ties go down."""
    if label == COREFERENT:
        return EASY_POS if total > means.mean_pos else HARD_POS
    if label == NON_COREFERENT:
        return HARD_NEG if total > means.mean_neg else EASY_NEG
    raise ValidationError(f"cannot categorize pair with label {label!r}")


def categorize_pairs(
    scored: list[tuple[MentionPair, SimilarityComponents]],
    corpus_name: str = "",
) -> tuple[list[CategorizedPair], LabelMeans]:
    """Compute label means over the full pair set, then bucket every pair."""
    means = label_means(
        ((pair.label, comps.total) for pair, comps in scored), corpus_name
    )
    out = [
        CategorizedPair(pair, comps, categorize(comps.total, pair.label, means))
        for pair, comps in scored
    ]
    return out, means


def difficulty_histogram(categorized: list[CategorizedPair], bins: int) -> list[dict]:
    """Per-category bin counts over the global [min_total, max_total] range.

    Returns CSV-ready rows: {"category", "bin_lo", "bin_hi", "count"}.
    """
    if bins < 1:
        raise ValidationError(f"bins must be >= 1, got {bins}")
    if not categorized:
        return []
    totals = [cp.components.total for cp in categorized]
    lo, hi = min(totals), max(totals)
    if hi == lo:  # all totals equal; widen so histogramming stays well-defined
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    rows = []
    for category in CATEGORIES:
        values = [cp.components.total for cp in categorized if cp.category == category]
        counts, _ = np.histogram(values, bins=edges)
        for b in range(len(counts)):
            rows.append(
                {
                    "category": category,
                    "bin_lo": float(edges[b]),
                    "bin_hi": float(edges[b + 1]),
                    "count": int(counts[b]),
                }
            )
    return rows


def write_categories_csv(categorized: list[CategorizedPair], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for cp in categorized:
            comps = cp.components
            writer.writerow(
                [
                    cp.pair.a, cp.pair.b, cp.pair.label,
                    comps.same_topic, comps.same_doc,
                    repr(comps.wu_palmer), repr(comps.cosine_bidir),
                    repr(comps.total), cp.category,
                ]
            )


def read_categories_csv(path: str | Path) -> list[CategorizedPair]:
    path = Path(path)
    out: list[CategorizedPair] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(f"{path.name}: missing columns {sorted(missing)}")
        for row in reader:
            if row["category"] not in CATEGORIES:
                raise ValidationError(f"{path.name}: unknown category {row['category']!r}")
            pair = MentionPair(
                a=row["pair_a"],
                b=row["pair_b"],
                label=row["label"],
                same_doc=row["same_doc"] == "1",
                same_topic=row["same_topic"] == "1",
            )
            comps = SimilarityComponents(
                same_topic=int(row["same_topic"]),
                same_doc=int(row["same_doc"]),
                wu_palmer=float(row["wu_palmer"]),
                cosine_bidir=float(row["cosine"]),
            )
            out.append(CategorizedPair(pair=pair, components=comps, category=row["category"]))
    return out
