"""Transitive-closure clustering of pairwise scores.

Pairs scoring at or above the threshold become edges; clusters are the
connected components. Output order is canonical (clusters sorted by
their smallest member id) so results never depend on score order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import FormatError, ValidationError
from .scorer import PairScore


@dataclass(frozen=True)
class ClusterSet:
    """A partition of a mention set into disjoint, non-empty clusters."""

    clusters: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for cluster in self.clusters:
            if not cluster:
                raise ValidationError("empty cluster")
            overlap = seen & cluster
            if overlap:
                raise ValidationError(f"clusters overlap on {sorted(overlap)[:3]}")
            seen |= cluster

    @classmethod
    def from_groups(cls, groups) -> "ClusterSet":
        ordered = sorted((frozenset(g) for g in groups), key=lambda c: min(c))
        return cls(tuple(ordered))

    @property
    def covers(self) -> frozenset[str]:
        out: set[str] = set()
        for cluster in self.clusters:
            out |= cluster
        return frozenset(out)

    def assignment(self) -> dict[str, int]:
        """mention_id -> index of its cluster."""
        return {m: i for i, cluster in enumerate(self.clusters) for m in cluster}

    def __len__(self) -> int:
        return len(self.clusters)


def cluster(mentions, scores: list[PairScore], threshold: float) -> ClusterSet:
    """Connected components over edges with s_mean >= threshold.

    Mentions never mentioned by a qualifying score become singletons.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold {threshold} outside [0, 1]")
    ids = sorted(mentions)
    index = {m: i for i, m in enumerate(ids)}
    edges_a: list[int] = []
    edges_b: list[int] = []
    for score in scores:
        a, b = score.pair
        if a not in index or b not in index:
            raise ValidationError(f"scored pair ({a!r}, {b!r}) references unknown mention")
        if score.s_mean >= threshold:
            edges_a.append(index[a])
            edges_b.append(index[b])

    labels = kernels.connected_components(
        len(ids), np.asarray(edges_a, dtype=np.int64), np.asarray(edges_b, dtype=np.int64)
    )
    groups: dict[int, set[str]] = {}
    for mention_id, label in zip(ids, labels):
        groups.setdefault(int(label), set()).add(mention_id)
    return ClusterSet.from_groups(groups.values())


def write_clusters_jsonl(cluster_set: ClusterSet, path: str | Path) -> None:
    """One {"mention_id", "cluster_id"} object per line; ids are "c<i>"."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for i, members in enumerate(cluster_set.clusters):
            for mention_id in sorted(members):
                fh.write(json.dumps({"mention_id": mention_id, "cluster_id": f"c{i}"}) + "\n")


def read_clusters_jsonl(path: str | Path) -> ClusterSet:
    path = Path(path)
    groups: dict[str, set[str]] = {}
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                mention_id = obj["mention_id"]
                cluster_id = obj["cluster_id"]
            except (json.JSONDecodeError, TypeError, KeyError):
                raise FormatError(
                    f"{path.name} line {lineno}: expected "
                    '{"mention_id": ..., "cluster_id": ...}'
                ) from None
            if mention_id in seen:
                raise ValidationError(f"{path.name} line {lineno}: duplicate mention {mention_id!r}")
            seen.add(mention_id)
            groups.setdefault(cluster_id, set()).add(mention_id)
    return ClusterSet.from_groups(groups.values())


_CONLL_TAG = re.compile(r"^\((\d+)\)$")


def write_conll(
    cluster_set: ClusterSet,
    path: str | Path,
    doc_of: dict[str, str] | None = None,
    document_name: str = "corpus",
) -> None:
    """CoNLL-2012-style emission: one token line per mention with a
    (cluster-integer) bracket tag, so external scorers can re-score it.
    """
    assignment = cluster_set.assignment()
    doc_of = doc_of or {}
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"#begin document ({document_name}); part 000\n")
        for position, mention_id in enumerate(sorted(assignment)):
            doc = doc_of.get(mention_id, "d0")
            fh.write(f"{doc}\t{position}\t{mention_id}\t({assignment[mention_id]})\n")
        fh.write("#end document\n")


def read_conll(path: str | Path) -> ClusterSet:
    path = Path(path)
    groups: dict[int, set[str]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path.name} line {lineno}: expected 4 tab-separated columns")
            match = _CONLL_TAG.match(parts[3])
            if not match:
                raise FormatError(f"{path.name} line {lineno}: bad coreference tag {parts[3]!r}")
            groups.setdefault(int(match.group(1)), set()).add(parts[2])
    return ClusterSet.from_groups(groups.values())
