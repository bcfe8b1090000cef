import json

import pytest

from cdcr.corpus import (
    COREFERENT,
    NON_COREFERENT,
    Corpus,
    Mention,
    PruningConfig,
    generate_pairs,
    load_corpus,
    load_synonym_pairs,
    normalize_lemma,
)
from cdcr.errors import ValidationError


def make_mention(mid, lemma="kill", doc="d1", topic="t1", cluster="c1", sentence=None):
    sentence = sentence or f"someone did {lemma} here"
    return {
        "mention_id": mid,
        "doc_id": doc,
        "topic_id": topic,
        "subtopic_id": None,
        "sentence": sentence,
        "trigger_text": lemma,
        "trigger_lemma": lemma,
        "token_span": [2, 2],
        "gold_cluster": cluster,
    }


def write_corpus(tmp_path, rows, name="corpus.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path


class TestLoadCorpus:
    def test_three_mentions_two_docs_one_topic(self, tmp_path):
        rows = [
            make_mention("m1", doc="d1"),
            make_mention("m2", doc="d1"),
            make_mention("m3", doc="d2"),
        ]
        corpus = load_corpus(write_corpus(tmp_path, rows), "train")
        assert len(corpus) == 3
        assert corpus.mention("m3").doc_id == "d2"

    def test_ecb_scale_fixture(self, tmp_path):
        rows = [
            make_mention(f"m{i:04d}", doc=f"d{i % 200}", topic=f"t{i % 200 % 40}",
                         cluster=f"c{i % 805}")
            for i in range(1780)
        ]
        corpus = load_corpus(write_corpus(tmp_path, rows), "test")
        assert len(corpus) == 1780

    def test_duplicate_mention_id_rejected(self, tmp_path):
        rows = [make_mention("m1"), make_mention("m1")]
        with pytest.raises(ValidationError, match="duplicate mention_id"):
            load_corpus(write_corpus(tmp_path, rows), "train")

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(make_mention("m1")) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="line 2"):
            load_corpus(path, "train")

    def test_doc_in_two_topics_rejected(self, tmp_path):
        rows = [make_mention("m1", doc="d1", topic="t1"),
                make_mention("m2", doc="d1", topic="t2")]
        with pytest.raises(ValidationError, match="topics"):
            load_corpus(write_corpus(tmp_path, rows), "train")

    def test_span_out_of_range_rejected(self, tmp_path):
        row = make_mention("m1")
        row["token_span"] = [2, 99]
        with pytest.raises(ValidationError, match="token span"):
            load_corpus(write_corpus(tmp_path, [row]), "train")

    def test_missing_field_reports_line(self, tmp_path):
        row = make_mention("m1")
        del row["gold_cluster"]
        with pytest.raises(ValidationError, match="gold_cluster"):
            load_corpus(write_corpus(tmp_path, [row]), "train")

    def test_bad_split_rejected(self, tmp_path):
        path = write_corpus(tmp_path, [make_mention("m1")])
        with pytest.raises(ValidationError, match="split"):
            load_corpus(path, "validation")


def corpus_from(rows):
    mentions = [
        Mention(
            mention_id=r["mention_id"], doc_id=r["doc_id"], topic_id=r["topic_id"],
            subtopic_id=r["subtopic_id"], sentence=r["sentence"],
            trigger_text=r["trigger_text"], trigger_lemma=r["trigger_lemma"],
            token_span=tuple(r["token_span"]), gold_cluster=r["gold_cluster"],
        )
        for r in rows
    ]
    return Corpus(mentions=mentions, split="train", name="inline")


class TestGeneratePairs:
    def test_exact_lemma_only(self):
        corpus = corpus_from([
            make_mention("m1", lemma="kill", cluster="c1"),
            make_mention("m2", lemma="kill", cluster="c2"),
            make_mention("m3", lemma="buy", cluster="c3"),
        ])
        config = PruningConfig(frozenset(), oracle_keep_positives=False, within_topic_only=True)
        pairs = generate_pairs(corpus, config)
        assert [(p.a, p.b) for p in pairs] == [("m1", "m2")]

    def test_synonyms_open_all_pairs(self):
        corpus = corpus_from([
            make_mention("m1", lemma="kill", cluster="c1"),
            make_mention("m2", lemma="kill", cluster="c2"),
            make_mention("m3", lemma="buy", cluster="c3"),
        ])
        config = PruningConfig.from_lemma_pairs({("kill", "buy")}, oracle_keep_positives=False)
        pairs = generate_pairs(corpus, config)
        assert len(pairs) == 3

    def test_oracle_keeps_gold_positive_cross_lemma(self):
        corpus = corpus_from([
            make_mention("m1", lemma="shoot", cluster="c1"),
            make_mention("m2", lemma="murder", cluster="c1"),
        ])
        config = PruningConfig(frozenset(), oracle_keep_positives=True, within_topic_only=True)
        pairs = generate_pairs(corpus, config)
        assert len(pairs) == 1
        assert pairs[0].label == COREFERENT

    def test_within_topic_only_blocks_cross_topic(self):
        corpus = corpus_from([
            make_mention("m1", lemma="kill", doc="d1", topic="t1"),
            make_mention("m2", lemma="kill", doc="d2", topic="t2"),
        ])
        assert generate_pairs(corpus, PruningConfig(frozenset(), True, True)) == []
        crossing = generate_pairs(corpus, PruningConfig(frozenset(), True, False))
        assert len(crossing) == 1 and not crossing[0].same_topic

    def test_determinism(self):
        corpus = corpus_from([
            make_mention(f"m{i}", lemma="kill", cluster=f"c{i % 3}") for i in range(12)
        ])
        config = PruningConfig(frozenset(), True, True)
        assert generate_pairs(corpus, config) == generate_pairs(corpus, config)

    def test_oracle_recall_of_positives_is_total(self):
        rows = []
        for i in range(20):
            rows.append(make_mention(f"m{i:02d}", lemma=f"lemma{i}", doc=f"d{i}",
                                     cluster=f"c{i % 4}"))
        corpus = corpus_from(rows)
        pairs = generate_pairs(corpus, PruningConfig(frozenset(), True, True))
        got_positive = {(p.a, p.b) for p in pairs if p.label == COREFERENT}
        want = set()
        ms = sorted(corpus.mentions, key=lambda m: m.mention_id)
        for i, ma in enumerate(ms):
            for mb in ms[i + 1:]:
                if ma.gold_cluster == mb.gold_cluster:
                    want.add((ma.mention_id, mb.mention_id))
        assert got_positive == want

    def test_labels_from_gold(self):
        corpus = corpus_from([
            make_mention("m1", lemma="kill", cluster="c1"),
            make_mention("m2", lemma="kill", cluster="c2"),
        ])
        pairs = generate_pairs(corpus, PruningConfig(frozenset(), True, True))
        assert pairs[0].label == NON_COREFERENT

    def test_same_doc_implies_same_topic_in_output(self):
        corpus = corpus_from([
            make_mention("m1", lemma="kill", doc="d1"),
            make_mention("m2", lemma="kill", doc="d1"),
        ])
        pair = generate_pairs(corpus, PruningConfig(frozenset(), True, True))[0]
        assert pair.same_doc and pair.same_topic


class TestLemmaNormalization:
    def test_case_insensitive_nfc(self):
        assert normalize_lemma("Kill") == normalize_lemma("kill")
        # U+00E9 vs e + combining acute normalize to the same lemma
        assert normalize_lemma("café") == normalize_lemma("café")

    def test_pair_generation_uses_normalization(self):
        corpus = corpus_from([
            make_mention("m1", lemma="Kill", cluster="c1"),
            make_mention("m2", lemma="kill", cluster="c2"),
        ])
        pairs = generate_pairs(corpus, PruningConfig(frozenset(), False, True))
        assert len(pairs) == 1


def test_synonym_file_roundtrip(tmp_path):
    path = tmp_path / "syn.tsv"
    path.write_text("kill\tmurder\nBuy\tacquire\n", encoding="utf-8")
    pairs = load_synonym_pairs(path)
    config = PruningConfig(pairs)
    assert config.is_synonym("murder", "KILL")
    assert config.is_synonym("acquire", "buy")
    assert not config.is_synonym("kill", "acquire")


def test_synonym_file_bad_line(tmp_path):
    path = tmp_path / "syn.tsv"
    path.write_text("kill murder\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="line 1"):
        load_synonym_pairs(path)
