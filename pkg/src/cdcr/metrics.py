"""Coreference evaluation: MUC, B-cubed, entity CEAF, and their CoNLL mean.

All metrics take a key (gold) and a response (predicted) ClusterSet over
the same mention set. Degenerate denominators (all-singleton MUC, empty
partitions) resolve to 0 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .clusterer import ClusterSet
from .errors import ValidationError


@dataclass(frozen=True)
class MetricResult:
    recall: float
    precision: float

    @property
    def f1(self) -> float:
        if self.precision + self.recall == 0.0:
            return 0.0
        return 2.0 * self.precision * self.recall / (self.precision + self.recall)

    @classmethod
    def from_counts(cls, r_num: float, r_den: float, p_num: float, p_den: float) -> "MetricResult":
        recall = r_num / r_den if r_den > 0 else 0.0
        precision = p_num / p_den if p_den > 0 else 0.0
        return cls(recall=recall, precision=precision)


@dataclass(frozen=True)
class Assignment:
    """Optimal one-to-one cluster alignment between key and response."""

    matching: tuple[tuple[int, int], ...]
    total_similarity: float


def _check_coverage(key: ClusterSet, response: ClusterSet) -> None:
    if key.covers != response.covers:
        missing = sorted(key.covers ^ response.covers)
        raise ValidationError(
            f"key and response cover different mentions (first differences: {missing[:5]})"
        )


def _muc_counts(primary: ClusterSet, other: ClusterSet) -> tuple[int, int]:
    # Vilain link counting: each primary cluster contributes
    # |cluster| - (number of `other` parts it is split into).
    membership = other.assignment()
    num = 0
    den = 0
    for cluster in primary.clusters:
        parts = set()
        unmatched = 0
        for mention in cluster:
            if mention in membership:
                parts.add(membership[mention])
            else:
                unmatched += 1
        num += len(cluster) - (len(parts) + unmatched)
        den += len(cluster) - 1
    return num, den


def muc(key: ClusterSet, response: ClusterSet) -> MetricResult:
    """Link-based metric; size-1 clusters contribute nothing to either side."""
    _check_coverage(key, response)
    r_num, r_den = _muc_counts(key, response)
    p_num, p_den = _muc_counts(response, key)
    return MetricResult.from_counts(r_num, r_den, p_num, p_den)


def _b_cubed_side(primary: ClusterSet, other: ClusterSet) -> tuple[float, int]:
    membership = {m: cluster for cluster in other.clusters for m in cluster}
    total = 0.0
    count = 0
    for cluster in primary.clusters:
        for mention in cluster:
            count += 1
            total += len(cluster & membership.get(mention, frozenset())) / len(cluster)
    return total, count


def b_cubed(key: ClusterSet, response: ClusterSet) -> MetricResult:
    """Mention-based metric averaging per-mention cluster overlap ratios."""
    _check_coverage(key, response)
    r_num, r_den = _b_cubed_side(key, response)
    p_num, p_den = _b_cubed_side(response, key)
    return MetricResult.from_counts(r_num, r_den, p_num, p_den)


def kuhn_munkres(similarity: np.ndarray) -> Assignment:
    """Exact maximum-similarity one-to-one matching of min(k, r) pairs."""
    sim = np.asarray(similarity, dtype=np.float64)
    if sim.ndim != 2:
        raise ValidationError(f"expected a 2-D similarity matrix, got shape {sim.shape}")
    if sim.size and not np.all(np.isfinite(sim)):
        raise ValidationError("non-finite entries in similarity matrix")
    rows, cols, total = kernels.max_weight_assignment(sim)
    matching = tuple((int(r), int(c)) for r, c in zip(rows, cols))
    return Assignment(matching=matching, total_similarity=float(total))


def _phi4(a: frozenset[str], b: frozenset[str]) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_e(key: ClusterSet, response: ClusterSet) -> MetricResult:
    """Entity-based CEAF with similarity phi4 = 2|K&R| / (|K|+|R|)."""
    _check_coverage(key, response)
    if not key.clusters or not response.clusters:
        return MetricResult.from_counts(0.0, len(key.clusters), 0.0, len(response.clusters))
    sim = np.empty((len(key.clusters), len(response.clusters)))
    for i, kc in enumerate(key.clusters):
        for j, rc in enumerate(response.clusters):
            sim[i, j] = _phi4(kc, rc)
    best = kuhn_munkres(sim).total_similarity
    return MetricResult.from_counts(best, len(key.clusters), best, len(response.clusters))


def conll_f1(muc_result: MetricResult, b3_result: MetricResult, ceafe_result: MetricResult) -> float:
    return (muc_result.f1 + b3_result.f1 + ceafe_result.f1) / 3.0


def evaluate(key: ClusterSet, response: ClusterSet) -> dict:
    """Full metric report as a JSON-ready dict."""
    m = muc(key, response)
    b = b_cubed(key, response)
    c = ceaf_e(key, response)
    return {
        "muc": {"recall": m.recall, "precision": m.precision, "f1": m.f1},
        "b3": {"recall": b.recall, "precision": b.precision, "f1": b.f1},
        "ceaf_e": {"recall": c.recall, "precision": c.precision, "f1": c.f1},
        "conll_f1": conll_f1(m, b, c),
    }


def _restrict(cluster_set: ClusterSet, mentions: frozenset[str]) -> ClusterSet:
    groups = [cluster & mentions for cluster in cluster_set.clusters]
    return ClusterSet.from_groups(g for g in groups if g)


def evaluate_macro(key: ClusterSet, response: ClusterSet, group_of: dict[str, str]) -> dict:
    """Macro aggregation: evaluate per group (e.g. topic), average the F1s."""
    _check_coverage(key, response)
    ungrouped = key.covers - set(group_of)
    if ungrouped:
        raise ValidationError(f"mentions without a group: {sorted(ungrouped)[:5]}")
    groups = sorted(set(group_of.values()))
    per_group = {}
    sums = {"muc": 0.0, "b3": 0.0, "ceaf_e": 0.0, "conll_f1": 0.0}
    for group in groups:
        members = frozenset(m for m, g in group_of.items() if g == group and m in key.covers)
        if not members:
            continue
        report = evaluate(_restrict(key, members), _restrict(response, members))
        per_group[group] = report
        for name in ("muc", "b3", "ceaf_e"):
            sums[name] += report[name]["f1"]
        sums["conll_f1"] += report["conll_f1"]
    n = len(per_group)
    if n == 0:
        raise ValidationError("no non-empty groups to evaluate")
    return {
        "muc": {"f1": sums["muc"] / n},
        "b3": {"f1": sums["b3"] / n},
        "ceaf_e": {"f1": sums["ceaf_e"] / n},
        "conll_f1": sums["conll_f1"] / n,
        "per_group": per_group,
    }
