"""Synthetic corpus + embedding fixtures for end-to-end pipeline runs.

The generated evaluation corpus splits its clusters into an "easy" half
and a "hard" half. Easy clusters are separable in the text space only
(their vision vectors collapse onto a shared direction); hard clusters
are separable in the vision space only (their text vectors collapse).
Train-split vectors are informative in both modalities and related by a
fixed signed permutation, so a ridge bridge fitted on training pairs
carries the vision structure of hard pairs back into the text space.

Trigger lemmas and sentence-pair cosines are arranged so that the
difficulty categorizer buckets exactly the hard-cluster pairs as hard.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import COREFERENT, Corpus, Mention, MentionPair, PruningConfig, generate_pairs
from .embedstore import TEXT, VISION, write_embedding_file
from .errors import ValidationError

TEXT_ENCODER = "toy-text"
VISION_ENCODER = "toy-vit"
SENTENCE_ENCODER = "toy-text-ctx"

_EASY_LEMMA = "acquire"
_HARD_LEMMAS = ("quake", "temblor", "quake", "temblor", "quake")

# Target cosine of the cross-encoded sentence vectors per pair kind.
_COS_TARGETS = {
    ("easy", True): 0.9,
    ("easy", False): 0.05,
    ("hard", True): 0.1,
    ("hard", False): 0.7,
}

TAXONOMY_LINES = (
    {"synset": "root.n.01", "parents": [], "lemmas": []},
    {"synset": "event.n.01", "parents": ["root.n.01"], "lemmas": []},
    {"synset": "commerce.n.01", "parents": ["event.n.01"], "lemmas": []},
    {"synset": "acquire.v.01", "parents": ["commerce.n.01"], "lemmas": ["acquire"]},
    {"synset": "geology.n.01", "parents": ["event.n.01"], "lemmas": []},
    {"synset": "quake.n.01", "parents": ["geology.n.01"], "lemmas": ["quake"]},
    {"synset": "temblor.n.01", "parents": ["commerce.n.01"], "lemmas": ["temblor"]},
)


@dataclass(frozen=True)
class FixturePaths:
    base: Path
    train_corpus: Path
    eval_corpus: Path
    taxonomy: Path
    synonyms: Path
    text_train: Path
    vision_train: Path
    text_eval: Path
    vision_eval: Path
    sentence_eval: Path


def _cluster_lemmas(cluster: int, n_easy: int, mentions_per_cluster: int) -> list[str]:
    if cluster < n_easy:
        return [_EASY_LEMMA] * mentions_per_cluster
    return [_HARD_LEMMAS[i % len(_HARD_LEMMAS)] for i in range(mentions_per_cluster)]


def _build_corpus(
    prefix: str,
    split: str,
    n_clusters: int,
    mentions_per_cluster: int,
) -> Corpus:
    n_easy = n_clusters // 2
    mentions = []
    for c in range(n_clusters):
        lemmas = _cluster_lemmas(c, n_easy, mentions_per_cluster)
        for i in range(mentions_per_cluster):
            mention_id = f"{prefix}_c{c:02d}_m{i}"
            sentence = f"the {lemmas[i]} at site {c * mentions_per_cluster + i} made headlines"
            mentions.append(
                Mention(
                    mention_id=mention_id,
                    doc_id=f"{prefix}_doc_{c:02d}_{i}",
                    topic_id="t1",
                    subtopic_id=None,
                    sentence=sentence,
                    trigger_text=lemmas[i],
                    trigger_lemma=lemmas[i],
                    token_span=(1, 1),
                    gold_cluster=f"{prefix}_cluster_{c:02d}",
                )
            )
    return Corpus(mentions=mentions, split=split, name=f"{prefix}-synthetic")


def _write_corpus(corpus: Corpus, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for m in corpus.mentions:
            fh.write(
                json.dumps(
                    {
                        "mention_id": m.mention_id,
                        "doc_id": m.doc_id,
                        "topic_id": m.topic_id,
                        "subtopic_id": m.subtopic_id,
                        "sentence": m.sentence,
                        "trigger_text": m.trigger_text,
                        "trigger_lemma": m.trigger_lemma,
                        "token_span": list(m.token_span),
                        "gold_cluster": m.gold_cluster,
                    }
                )
                + "\n"
            )


def _signed_permutation(rng: np.random.Generator, dim: int) -> np.ndarray:
    perm = rng.permutation(dim)
    signs = rng.choice([-1.0, 1.0], size=dim)
    P = np.zeros((dim, dim))
    P[np.arange(dim), perm] = signs
    return P


def _cluster_of(mention_id: str) -> int:
    return int(mention_id.split("_c")[1].split("_")[0])


def _pair_kind(pair: MentionPair, n_easy: int) -> tuple[str, bool]:
    group = "easy" if _cluster_of(pair.a) < n_easy else "hard"
    return group, pair.label == COREFERENT


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _vec_pair_with_cosine(rng: np.random.Generator, dim: int, target: float) -> tuple[np.ndarray, np.ndarray]:
    u = _unit(rng, dim)
    w = _unit(rng, dim)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    v = target * u + np.sqrt(1.0 - target**2) * w
    return u, v


def generate_transfer_fixture(
    out_dir: str | Path,
    seed: int = 2024,
    n_clusters: int = 12,
    mentions_per_cluster: int = 5,
    hidden_dim: int = 16,
) -> FixturePaths:
    """Write the full fixture (corpora, taxonomy, synonyms, embeddings)."""
    if n_clusters % 2 != 0:
        raise ValidationError("n_clusters must be even (half easy, half hard)")
    if n_clusters + 2 > hidden_dim:
        raise ValidationError(
            f"hidden_dim {hidden_dim} too small for {n_clusters} clusters "
            f"(needs n_clusters + 2 axes)"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n_easy = n_clusters // 2
    H = hidden_dim
    text_blind_axis = H - 2   # hard-cluster text vectors collapse here
    vision_blind_axis = H - 1  # easy-cluster vision latents collapse here
    bridge = _signed_permutation(rng, H)

    train = _build_corpus("tr", "train", n_clusters, mentions_per_cluster)
    evalc = _build_corpus("ev", "test", n_clusters, mentions_per_cluster)

    def mention_vectors(corpus: Corpus, is_eval: bool):
        text: dict[str, np.ndarray] = {}
        vision: dict[str, np.ndarray] = {}
        for m in corpus.mentions:
            c = _cluster_of(m.mention_id)
            if not is_eval:
                text_latent = vision_latent = np.eye(H)[c]
            elif c < n_easy:
                text_latent = np.eye(H)[c]
                vision_latent = np.eye(H)[vision_blind_axis]
            else:
                text_latent = np.eye(H)[text_blind_axis]
                vision_latent = np.eye(H)[c]
            text[m.mention_id] = text_latent + rng.normal(0, 0.02, H)
            vision[m.mention_id] = bridge @ (vision_latent + rng.normal(0, 0.02, H))
        return text, vision

    text_train_vecs, vision_train_vecs = mention_vectors(train, is_eval=False)
    text_eval_vecs, vision_eval_vecs = mention_vectors(evalc, is_eval=True)

    config = PruningConfig(frozenset(), oracle_keep_positives=True, within_topic_only=True)
    train_pairs = generate_pairs(train, config)
    eval_pairs = generate_pairs(evalc, config)

    def pair_records(vecs: dict[str, np.ndarray], pairs: list[MentionPair]):
        out_pairs = {}
        for pair in pairs:
            mean = (vecs[pair.a] + vecs[pair.b]) / 2.0
            out_pairs[(pair.a, pair.b)] = mean
            out_pairs[(pair.b, pair.a)] = mean
        return out_pairs

    sentence_pairs: dict[tuple[str, str], np.ndarray] = {}
    for pair in eval_pairs:
        target = _COS_TARGETS[_pair_kind(pair, n_easy)]
        for first, second in ((pair.a, pair.b), (pair.b, pair.a)):
            u, v = _vec_pair_with_cosine(rng, H, target)
            sentence_pairs[(first, second)] = np.concatenate([u, v])

    paths = FixturePaths(
        base=out,
        train_corpus=out / "train.jsonl",
        eval_corpus=out / "eval.jsonl",
        taxonomy=out / "taxonomy.jsonl",
        synonyms=out / "synonyms.tsv",
        text_train=out / "text-train.emb",
        vision_train=out / "vision-train.emb",
        text_eval=out / "text-eval.emb",
        vision_eval=out / "vision-eval.emb",
        sentence_eval=out / "sentence-eval.emb",
    )
    _write_corpus(train, paths.train_corpus)
    _write_corpus(evalc, paths.eval_corpus)
    with paths.taxonomy.open("w", encoding="utf-8") as fh:
        for line in TAXONOMY_LINES:
            fh.write(json.dumps(line) + "\n")
    paths.synonyms.write_text("", encoding="utf-8")

    write_embedding_file(
        paths.text_train, TEXT, TEXT_ENCODER, H,
        text_train_vecs, pair_records(text_train_vecs, train_pairs),
    )
    write_embedding_file(
        paths.vision_train, VISION, VISION_ENCODER, H,
        vision_train_vecs, pair_records(vision_train_vecs, train_pairs),
    )
    write_embedding_file(
        paths.text_eval, TEXT, TEXT_ENCODER, H,
        text_eval_vecs, pair_records(text_eval_vecs, eval_pairs),
    )
    write_embedding_file(
        paths.vision_eval, VISION, VISION_ENCODER, H,
        vision_eval_vecs, pair_records(vision_eval_vecs, eval_pairs),
    )
    write_embedding_file(
        paths.sentence_eval, TEXT, SENTENCE_ENCODER, 2 * H,
        None, sentence_pairs,
    )
    return paths
