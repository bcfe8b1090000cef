import numpy as np
import pytest

from cdcr.corpus import COREFERENT, NON_COREFERENT, Corpus, Mention, MentionPair
from cdcr.difficulty import (
    EASY_NEG,
    EASY_POS,
    HARD_NEG,
    HARD_POS,
    CategorizedPair,
    LabelMeans,
    SimilarityComponents,
    categorize,
    categorize_pairs,
    difficulty_histogram,
    label_means,
    pair_similarity,
    read_categories_csv,
    write_categories_csv,
)
from cdcr.errors import ValidationError
from cdcr.taxonomy import Taxonomy


def mention(mid, lemma, doc="d1", topic="t1"):
    return Mention(
        mention_id=mid, doc_id=doc, topic_id=topic, subtopic_id=None,
        sentence=f"x {lemma} y", trigger_text=lemma, trigger_lemma=lemma,
        token_span=(1, 1), gold_cluster="c1",
    )


@pytest.fixture
def two_mention_corpus():
    return Corpus(
        mentions=[mention("m1", "quake", doc="d1"), mention("m2", "quake", doc="d2")],
        split="test", name="fixture",
    )


@pytest.fixture
def tiny_taxonomy():
    return Taxonomy(
        parents={"root": frozenset(), "event": frozenset({"root"}),
                 "quake": frozenset({"event"})},
        lemma_index={"quake": frozenset({"quake"})},
    )


def vec_pair_with_cosine(target, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=dim)
    u /= np.linalg.norm(u)
    w = rng.normal(size=dim)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    return u, target * u + np.sqrt(1 - target**2) * w


class TestPairSimilarity:
    def test_components_summed(self, two_mention_corpus, tiny_taxonomy):
        pair = MentionPair("m1", "m2", COREFERENT, same_doc=False, same_topic=True)
        comps = pair_similarity(
            pair, two_mention_corpus, tiny_taxonomy,
            vec_pair_with_cosine(0.607, seed=1), vec_pair_with_cosine(0.607, seed=2),
        )
        assert comps.same_topic == 1 and comps.same_doc == 0
        assert comps.wu_palmer == 1.0  # identical lemmas
        assert comps.cosine_bidir == pytest.approx(0.607, abs=1e-9)
        assert comps.total == pytest.approx(2.607, abs=1e-9)

    def test_orderings_averaged(self, two_mention_corpus, tiny_taxonomy):
        pair = MentionPair("m1", "m2", COREFERENT, same_doc=False, same_topic=True)
        comps = pair_similarity(
            pair, two_mention_corpus, tiny_taxonomy,
            vec_pair_with_cosine(0.8, seed=3), vec_pair_with_cosine(0.4, seed=4),
        )
        assert comps.cosine_bidir == pytest.approx(0.6, abs=1e-9)

    def test_swap_invariance(self, two_mention_corpus, tiny_taxonomy):
        ab = vec_pair_with_cosine(0.3, seed=5)
        ba = vec_pair_with_cosine(0.9, seed=6)
        pair = MentionPair("m1", "m2", COREFERENT, same_doc=False, same_topic=True)
        comps = pair_similarity(pair, two_mention_corpus, tiny_taxonomy, ab, ba)
        # swapping the pair roles swaps which ordering record is which
        swapped = pair_similarity(pair, two_mention_corpus, tiny_taxonomy, ba, ab)
        assert comps.total == pytest.approx(swapped.total, abs=1e-12)

    def test_zero_norm_vector_is_an_error(self, two_mention_corpus, tiny_taxonomy):
        pair = MentionPair("m1", "m2", COREFERENT, same_doc=False, same_topic=True)
        with pytest.raises(ValidationError, match="zero-norm"):
            pair_similarity(
                pair, two_mention_corpus, tiny_taxonomy,
                (np.zeros(4), np.ones(4)), vec_pair_with_cosine(0.5),
            )

    def test_same_doc_total(self, tiny_taxonomy):
        corpus = Corpus(
            mentions=[mention("m1", "quake"), mention("m2", "quake")],
            split="test", name="fixture",
        )
        pair = MentionPair("m1", "m2", COREFERENT, same_doc=True, same_topic=True)
        u, _ = vec_pair_with_cosine(0.0, seed=7)
        comps = pair_similarity(pair, corpus, tiny_taxonomy,
                                vec_pair_with_cosine(0.0, seed=7),
                                vec_pair_with_cosine(0.0, seed=8))
        assert comps.total == pytest.approx(3.0, abs=1e-9)


class TestLabelMeans:
    def test_means(self):
        means = label_means([(COREFERENT, 2.0), (COREFERENT, 3.0),
                             (NON_COREFERENT, 1.0)])
        assert means.mean_pos == 2.5
        assert means.mean_neg == 1.0

    def test_reference_means_reproduced(self):
        # component inputs chosen to average to the published 2.25 / 2.14
        rows = [(COREFERENT, 2.0), (COREFERENT, 2.5),
                (NON_COREFERENT, 2.0), (NON_COREFERENT, 2.28)]
        means = label_means(rows)
        assert means.mean_pos == pytest.approx(2.25, abs=1e-12)
        assert means.mean_neg == pytest.approx(2.14, abs=1e-12)

    def test_single_positive(self):
        means = label_means([(COREFERENT, 1.23), (NON_COREFERENT, 0.5)])
        assert means.mean_pos == 1.23

    def test_empty_class_rejected(self):
        with pytest.raises(ValidationError, match="each label"):
            label_means([(COREFERENT, 1.0)])


class TestCategorize:
    MEANS = LabelMeans(mean_pos=2.25, mean_neg=2.14)

    @pytest.mark.parametrize(
        "total,label,expected",
        [
            (2.607, COREFERENT, EASY_POS),
            (2.12, COREFERENT, HARD_POS),
            (1.92, NON_COREFERENT, EASY_NEG),
            (2.60, NON_COREFERENT, HARD_NEG),
        ],
    )
    def test_reference_examples(self, total, label, expected):
        assert categorize(total, label, self.MEANS) == expected

    def test_tie_goes_to_else_branch(self):
        assert categorize(2.25, COREFERENT, self.MEANS) == HARD_POS
        assert categorize(2.14, NON_COREFERENT, self.MEANS) == EASY_NEG

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            categorize(2.0, "unknown", self.MEANS)


def make_categorized(n_per_class=2):
    rows = []
    totals = {EASY_POS: 3.0, HARD_POS: 1.0, EASY_NEG: 0.5, HARD_NEG: 2.8}
    for cat, total in totals.items():
        label = COREFERENT if cat in (EASY_POS, HARD_POS) else NON_COREFERENT
        for i in range(n_per_class):
            pair = MentionPair(f"a{cat}{i}", f"b{cat}{i}", label, False, True)
            comps = SimilarityComponents(1, 0, 0.0, total - 1.0)
            rows.append(CategorizedPair(pair, comps, cat))
    return rows


class TestCategorizePairs:
    def test_partition_property(self):
        scored = []
        rng = np.random.default_rng(5)
        for i in range(40):
            label = COREFERENT if i % 2 else NON_COREFERENT
            pair = MentionPair(f"a{i:02d}", f"b{i:02d}", label, False, True)
            comps = SimilarityComponents(1, 0, float(rng.uniform()), float(rng.uniform(-1, 1)))
            scored.append((pair, comps))
        categorized, means = categorize_pairs(scored, "x")
        assert len(categorized) == 40
        for cp in categorized:
            if cp.category == EASY_POS:
                assert cp.components.total > means.mean_pos
            elif cp.category == HARD_POS:
                assert cp.components.total <= means.mean_pos
            elif cp.category == HARD_NEG:
                assert cp.components.total > means.mean_neg
            else:
                assert cp.components.total <= means.mean_neg


class TestHistogram:
    def test_one_bin_counts_each_category(self):
        rows = difficulty_histogram(make_categorized(1), bins=1)
        assert len(rows) == 4
        assert all(r["count"] == 1 for r in rows)

    def test_empty_input(self):
        assert difficulty_histogram([], bins=3) == []

    def test_bad_bins(self):
        with pytest.raises(ValidationError, match="bins"):
            difficulty_histogram(make_categorized(), bins=0)

    def test_separated_fixture_occupies_disjoint_bins(self):
        # easy_pos totals (3.0) sit strictly above hard_pos totals (1.0),
        # so their occupied bins must not overlap and must be ordered
        rows = difficulty_histogram(make_categorized(3), bins=5)

        def occupied(category):
            per_cat = [r for r in rows if r["category"] == category]
            return {i for i, r in enumerate(per_cat) if r["count"] > 0}

        easy_bins, hard_bins = occupied(EASY_POS), occupied(HARD_POS)
        assert easy_bins and hard_bins
        assert not (easy_bins & hard_bins)
        assert min(easy_bins) > max(hard_bins)

    def test_counts_sum_to_input(self):
        rows = difficulty_histogram(make_categorized(4), bins=7)
        assert sum(r["count"] for r in rows) == 16


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        rows = make_categorized(2)
        path = tmp_path / "cats.csv"
        write_categories_csv(rows, path)
        back = read_categories_csv(path)
        assert [cp.pair for cp in back] == [cp.pair for cp in rows]
        assert [cp.category for cp in back] == [cp.category for cp in rows]
        for a, b in zip(back, rows):
            assert a.components.total == pytest.approx(b.components.total, abs=1e-15)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("pair_a,pair_b\nx,y\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="missing columns"):
            read_categories_csv(path)
