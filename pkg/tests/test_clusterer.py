import numpy as np
import pytest

from cdcr.clusterer import (
    ClusterSet,
    cluster,
    read_clusters_jsonl,
    read_conll,
    write_clusters_jsonl,
    write_conll,
)
from cdcr.errors import ValidationError
from cdcr.scorer import PairScore


def ps(a, b, s):
    return PairScore((a, b), s, s)


class TestClusterSet:
    def test_partition_validated(self):
        with pytest.raises(ValidationError, match="overlap"):
            ClusterSet(clusters=(frozenset({"a", "b"}), frozenset({"b"})))

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            ClusterSet(clusters=(frozenset(),))

    def test_canonical_order(self):
        cs = ClusterSet.from_groups([{"z"}, {"b", "y"}, {"a"}])
        assert [min(c) for c in cs.clusters] == ["a", "b", "z"]


class TestCluster:
    def test_transitive_closure_fixture(self):
        scores = [ps("a", "b", 0.9), ps("b", "c", 0.6), ps("c", "d", 0.4)]
        cs = cluster({"a", "b", "c", "d"}, scores, 0.5)
        assert [sorted(c) for c in cs.clusters] == [["a", "b", "c"], ["d"]]

    def test_no_scores_all_singletons(self):
        cs = cluster({"a", "b", "c"}, [], 0.5)
        assert len(cs) == 3
        assert all(len(c) == 1 for c in cs.clusters)

    def test_threshold_boundary_inclusive(self):
        cs = cluster({"a", "b"}, [ps("a", "b", 0.5)], 0.5)
        assert len(cs) == 1

    def test_unknown_mention_rejected(self):
        with pytest.raises(ValidationError, match="unknown mention"):
            cluster({"a"}, [ps("a", "z", 0.9)], 0.5)

    def test_threshold_out_of_range(self):
        with pytest.raises(ValidationError, match="threshold"):
            cluster({"a"}, [], 1.5)

    def test_partition_covers_input(self, rng):
        mentions = [f"m{i}" for i in range(30)]
        scores = [
            ps(*sorted(rng.choice(mentions, size=2, replace=False)), float(rng.uniform()))
            for _ in range(60)
        ]
        cs = cluster(set(mentions), scores, 0.5)
        assert cs.covers == frozenset(mentions)
        assert sum(len(c) for c in cs.clusters) == len(mentions)

    def test_raising_threshold_refines(self, rng):
        mentions = [f"m{i}" for i in range(15)]
        scores = [
            ps(*sorted(rng.choice(mentions, size=2, replace=False)), float(rng.uniform()))
            for _ in range(40)
        ]
        low = cluster(set(mentions), scores, 0.3)
        high = cluster(set(mentions), scores, 0.7)
        for hc in high.clusters:
            assert any(hc <= lc for lc in low.clusters)

    def test_score_order_irrelevant(self, rng):
        mentions = [f"m{i}" for i in range(12)]
        scores = [
            ps(*sorted(rng.choice(mentions, size=2, replace=False)), float(rng.uniform()))
            for _ in range(30)
        ]
        base = cluster(set(mentions), scores, 0.5)
        for _ in range(5):
            shuffled = list(scores)
            rng.shuffle(shuffled)
            assert cluster(set(mentions), shuffled, 0.5).clusters == base.clusters


class TestJsonl:
    def test_round_trip(self, tmp_path):
        cs = ClusterSet.from_groups([{"a", "b"}, {"c"}])
        path = tmp_path / "clusters.jsonl"
        write_clusters_jsonl(cs, path)
        assert read_clusters_jsonl(path).clusters == cs.clusters

    def test_duplicate_mention_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            '{"mention_id": "a", "cluster_id": "c0"}\n'
            '{"mention_id": "a", "cluster_id": "c1"}\n',
            encoding="utf-8",
        )
        with pytest.raises(ValidationError, match="duplicate"):
            read_clusters_jsonl(path)


class TestConll:
    def test_round_trip(self, tmp_path):
        cs = ClusterSet.from_groups([{"a", "b"}, {"c"}, {"d", "e", "f"}])
        path = tmp_path / "out.conll"
        write_conll(cs, path, doc_of={"a": "d1", "b": "d2"})
        assert read_conll(path).clusters == cs.clusters

    def test_bracket_tags_present(self, tmp_path):
        cs = ClusterSet.from_groups([{"a", "b"}])
        path = tmp_path / "out.conll"
        write_conll(cs, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("#begin document")
        assert lines[-1] == "#end document"
        assert all("(0)" in line for line in lines[1:-1])
