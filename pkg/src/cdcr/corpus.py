"""Corpus loading and candidate mention-pair generation.

A corpus is a JSON Lines file with one annotated event mention per line.
Candidate pairs are pruned by lemma identity, a user-supplied synonym
set, and an optional oracle that always keeps gold-coreferent pairs.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .errors import ValidationError

SPLITS = ("train", "dev", "test")

COREFERENT = "coreferent"
NON_COREFERENT = "non-coreferent"
UNKNOWN = "unknown"

_REQUIRED_FIELDS = (
    "mention_id",
    "doc_id",
    "topic_id",
    "sentence",
    "trigger_text",
    "trigger_lemma",
    "token_span",
    "gold_cluster",
)


def normalize_lemma(lemma: str) -> str:
    """NFC-normalized, casefolded form used for all lemma comparisons."""
    return unicodedata.normalize("NFC", lemma).casefold()


@dataclass(frozen=True)
class Mention:
    """One annotated event trigger in a document."""

    mention_id: str
    doc_id: str
    topic_id: str
    subtopic_id: str | None
    sentence: str
    trigger_text: str
    trigger_lemma: str
    token_span: tuple[int, int]
    gold_cluster: str

    def validate(self) -> None:
        start, end = self.token_span
        n_tokens = len(self.sentence.split())
        if not (0 <= start <= end < n_tokens):
            raise ValidationError(
                f"mention {self.mention_id!r}: token span {self.token_span} "
                f"out of range for a {n_tokens}-token sentence"
            )
        if not self.trigger_lemma:
            raise ValidationError(f"mention {self.mention_id!r}: empty trigger lemma")


@dataclass
class Corpus:
    """An immutable collection of mentions for one split."""

    mentions: list[Mention]
    split: str
    name: str
    _by_id: dict[str, Mention] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise ValidationError(f"unknown split {self.split!r} (expected one of {SPLITS})")
        by_id: dict[str, Mention] = {}
        doc_topic: dict[str, str] = {}
        for m in self.mentions:
            m.validate()
            if m.mention_id in by_id:
                raise ValidationError(f"duplicate mention_id {m.mention_id!r}")
            by_id[m.mention_id] = m
            seen = doc_topic.setdefault(m.doc_id, m.topic_id)
            if seen != m.topic_id:
                raise ValidationError(
                    f"doc {m.doc_id!r} appears under topics {seen!r} and {m.topic_id!r}"
                )
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.mentions)

    def mention(self, mention_id: str) -> Mention:
        try:
            return self._by_id[mention_id]
        except KeyError:
            raise ValidationError(f"unknown mention_id {mention_id!r}") from None

    def mention_ids(self) -> list[str]:
        return sorted(self._by_id)

    def gold_clusters(self) -> dict[str, set[str]]:
        """Gold partition as cluster-key -> set of mention ids."""
        out: dict[str, set[str]] = {}
        for m in self.mentions:
            out.setdefault(m.gold_cluster, set()).add(m.mention_id)
        return out


@dataclass(frozen=True)
class MentionPair:
    """Unordered candidate pair; `a < b` lexicographically."""

    a: str
    b: str
    label: str
    same_doc: bool
    same_topic: bool

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValidationError(f"degenerate pair ({self.a!r}, {self.a!r})")
        if self.a > self.b:
            raise ValidationError(f"pair ({self.a!r}, {self.b!r}) not in canonical order")
        if self.same_doc and not self.same_topic:
            raise ValidationError(f"pair ({self.a!r}, {self.b!r}): same_doc implies same_topic")
        if self.label not in (COREFERENT, NON_COREFERENT, UNKNOWN):
            raise ValidationError(f"unknown pair label {self.label!r}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b)


@dataclass(frozen=True)
class PruningConfig:
    """Candidate-pair filter: exact lemma OR synonym pair OR oracle positive."""

    synonym_pairs: frozenset[tuple[str, str]] = frozenset()
    oracle_keep_positives: bool = True
    within_topic_only: bool = True

    @staticmethod
    def canonical_pair(lemma_a: str, lemma_b: str) -> tuple[str, str]:
        na, nb = normalize_lemma(lemma_a), normalize_lemma(lemma_b)
        return (na, nb) if na <= nb else (nb, na)

    @classmethod
    def from_lemma_pairs(
        cls,
        pairs,
        oracle_keep_positives: bool = True,
        within_topic_only: bool = True,
    ) -> "PruningConfig":
        canon = frozenset(cls.canonical_pair(a, b) for a, b in pairs)
        return cls(canon, oracle_keep_positives, within_topic_only)

    def is_synonym(self, lemma_a: str, lemma_b: str) -> bool:
        return self.canonical_pair(lemma_a, lemma_b) in self.synonym_pairs


def _parse_mention(obj: dict, lineno: int) -> Mention:
    for key in _REQUIRED_FIELDS:
        if key not in obj:
            raise ValidationError(f"line {lineno}: missing field {key!r}")
    span = obj["token_span"]
    if (
        not isinstance(span, (list, tuple))
        or len(span) != 2
        or not all(isinstance(v, int) for v in span)
    ):
        raise ValidationError(f"line {lineno}: token_span must be [start, end]")
    subtopic = obj.get("subtopic_id")
    if subtopic is not None and not isinstance(subtopic, str):
        raise ValidationError(f"line {lineno}: subtopic_id must be a string or null")
    try:
        return Mention(
            mention_id=obj["mention_id"],
            doc_id=obj["doc_id"],
            topic_id=obj["topic_id"],
            subtopic_id=subtopic,
            sentence=obj["sentence"],
            trigger_text=obj["trigger_text"],
            trigger_lemma=obj["trigger_lemma"],
            token_span=(span[0], span[1]),
            gold_cluster=obj["gold_cluster"],
        )
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc}") from None


def load_corpus(path: str | Path, split: str) -> Corpus:
    """Load a corpus JSONL file, validating every invariant.

    Raises ValidationError with a line number on malformed input,
    duplicate mention ids, or inconsistent doc/topic references.
    """
    path = Path(path)
    mentions: list[Mention] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path.name} line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ValidationError(f"{path.name} line {lineno}: expected a JSON object")
            mentions.append(_parse_mention(obj, lineno))
    return Corpus(mentions=mentions, split=split, name=path.stem)


def load_synonym_pairs(path: str | Path) -> frozenset[tuple[str, str]]:
    """Read a synonym file: two tab-separated lemmas per line."""
    pairs = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValidationError(
                    f"synonym file line {lineno}: expected two tab-separated lemmas"
                )
            pairs.add(PruningConfig.canonical_pair(parts[0], parts[1]))
    return frozenset(pairs)


def generate_pairs(corpus: Corpus, config: PruningConfig) -> list[MentionPair]:
    """Emit the pruned candidate pair list in canonical (a, b) order.

    A pair is kept iff the normalized lemmas are equal, the lemma pair is
    in the synonym set, or the oracle is on and the pair is gold
    coreferent. Labels always come from the gold clusters.
    """
    out: list[MentionPair] = []
    mentions = sorted(corpus.mentions, key=lambda m: m.mention_id)
    for ma, mb in combinations(mentions, 2):
        same_topic = ma.topic_id == mb.topic_id
        if config.within_topic_only and not same_topic:
            continue
        coreferent = ma.gold_cluster == mb.gold_cluster
        keep = (
            normalize_lemma(ma.trigger_lemma) == normalize_lemma(mb.trigger_lemma)
            or config.is_synonym(ma.trigger_lemma, mb.trigger_lemma)
            or (config.oracle_keep_positives and coreferent)
        )
        if not keep:
            continue
        out.append(
            MentionPair(
                a=ma.mention_id,
                b=mb.mention_id,
                label=COREFERENT if coreferent else NON_COREFERENT,
                same_doc=ma.doc_id == mb.doc_id,
                same_topic=same_topic,
            )
        )
    return out
