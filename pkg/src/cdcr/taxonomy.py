"""Hypernym taxonomy: depth, least common subsumer, Wu-Palmer similarity.

The taxonomy is a rooted DAG of synsets (multiple parents allowed) with
a lemma index. Depth counts nodes along the shortest root path, so
roots have depth 1; Wu-Palmer is 2*depth(lcs) / (depth(a) + depth(b)),
maximized over the synsets of each lemma.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import normalize_lemma
from .errors import ValidationError


@dataclass
class Taxonomy:
    parents: dict[str, frozenset[str]]
    lemma_index: dict[str, frozenset[str]]
    roots: frozenset[str] = field(init=False)
    _depth: dict[str, int] = field(init=False, repr=False)
    _ancestors: dict[str, frozenset[str]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = set(self.parents)
        for synset, ps in self.parents.items():
            for p in ps:
                if p not in nodes:
                    raise ValidationError(f"synset {synset!r} lists unknown parent {p!r}")
        for lemma, synsets in self.lemma_index.items():
            for s in synsets:
                if s not in nodes:
                    raise ValidationError(f"lemma {lemma!r} indexed to unknown synset {s!r}")
        self.roots = frozenset(s for s, ps in self.parents.items() if not ps)
        self._depth = self._compute_depths()
        if len(self._depth) != len(nodes):
            unreachable = sorted(nodes - set(self._depth))
            raise ValidationError(
                f"cycle or unreachable synsets detected: {unreachable[:5]}"
                + ("..." if len(unreachable) > 5 else "")
            )
        self._ancestors = {}

    def _compute_depths(self) -> dict[str, int]:
        # Multi-source BFS downward from the roots; BFS order gives the
        # shortest root path even with multiple parents.
        children: dict[str, list[str]] = {s: [] for s in self.parents}
        for s, ps in self.parents.items():
            for p in ps:
                children[p].append(s)
        depth = {r: 1 for r in self.roots}
        queue = deque(sorted(self.roots))
        while queue:
            node = queue.popleft()
            for child in children[node]:
                if child not in depth:
                    depth[child] = depth[node] + 1
                    queue.append(child)
        return depth

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.parents)

    def __contains__(self, synset: str) -> bool:
        return synset in self.parents

    def depth(self, synset: str) -> int:
        try:
            return self._depth[synset]
        except KeyError:
            raise ValidationError(f"unknown synset {synset!r}") from None

    def ancestors(self, synset: str) -> frozenset[str]:
        """Reflexive-transitive parent closure."""
        if synset not in self.parents:
            raise ValidationError(f"unknown synset {synset!r}")
        cached = self._ancestors.get(synset)
        if cached is not None:
            return cached
        seen = {synset}
        queue = deque([synset])
        while queue:
            for p in self.parents[queue.popleft()]:
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        result = frozenset(seen)
        self._ancestors[synset] = result
        return result

    def lcs(self, s1: str, s2: str) -> str | None:
        """Deepest common ancestor; ties broken by smallest synset id."""
        common = self.ancestors(s1) & self.ancestors(s2)
        if not common:
            return None
        return min(common, key=lambda s: (-self._depth[s], s))

    def synsets_for(self, lemma: str) -> frozenset[str]:
        return self.lemma_index.get(normalize_lemma(lemma), frozenset())


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load a taxonomy JSONL file ({"synset", "parents", "lemmas"} per line)."""
    path = Path(path)
    parents: dict[str, frozenset[str]] = {}
    lemma_index: dict[str, set[str]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path.name} line {lineno}: invalid JSON ({exc.msg})") from None
            try:
                synset = obj["synset"]
                ps = obj.get("parents", [])
                lemmas = obj.get("lemmas", [])
            except (TypeError, KeyError):
                raise ValidationError(f"{path.name} line {lineno}: expected a synset object") from None
            if synset in parents:
                raise ValidationError(f"{path.name} line {lineno}: duplicate synset {synset!r}")
            parents[synset] = frozenset(ps)
            for lemma in lemmas:
                lemma_index.setdefault(normalize_lemma(lemma), set()).add(synset)
    return Taxonomy(
        parents=parents,
        lemma_index={k: frozenset(v) for k, v in lemma_index.items()},
    )


def wu_palmer(taxonomy: Taxonomy, lemma_a: str, lemma_b: str) -> float:
    """Wu-Palmer similarity between two lemmas, in [0, 1].

    Identical normalized lemmas score 1.0 without a taxonomy lookup.
    Otherwise the maximum over all synset pairs is taken; lemmas missing
    from the index (or pairs with no common ancestor) score 0.0.
    """
    if normalize_lemma(lemma_a) == normalize_lemma(lemma_b):
        return 1.0
    best = 0.0
    for sa in sorted(taxonomy.synsets_for(lemma_a)):
        for sb in sorted(taxonomy.synsets_for(lemma_b)):
            anc = taxonomy.lcs(sa, sb)
            if anc is None:
                continue
            score = 2.0 * taxonomy.depth(anc) / (taxonomy.depth(sa) + taxonomy.depth(sb))
            best = max(best, score)
    return best
