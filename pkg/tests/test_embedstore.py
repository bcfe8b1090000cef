import numpy as np
import pytest

from cdcr.embedstore import (
    AB,
    BA,
    TEXT,
    VISION,
    build_fused,
    build_pair_representation,
    load_store,
    write_embedding_file,
)
from cdcr.errors import FormatError, ValidationError


def write_text_store(path, dim=8, mentions=None, pairs=None, encoder="enc"):
    write_embedding_file(path, TEXT, encoder, dim, mentions, pairs)
    return path


class TestFileRoundTrip:
    def test_four_mentions_text_only(self, tmp_path, rng):
        vecs = {f"m{i}": rng.normal(size=8) for i in range(4)}
        path = write_text_store(tmp_path / "t.emb", 8, vecs)
        store = load_store(path)
        assert store.series() == [(TEXT, "enc", 8)]
        for mid, vec in vecs.items():
            got = store.mention_vec(mid, TEXT, "enc")
            np.testing.assert_array_equal(got, np.asarray(vec, dtype=np.float32).astype(np.float64))

    def test_pair_records(self, tmp_path, rng):
        pairs = {("a", "b"): rng.normal(size=4), ("b", "a"): rng.normal(size=4)}
        path = write_text_store(tmp_path / "p.emb", 4, None, pairs)
        store = load_store(path)
        assert store.pair_keys(TEXT, "enc") == [("a", "b"), ("b", "a")]
        assert store.has_pair("a", "b", TEXT, "enc")
        assert not store.has_pair("a", "c", TEXT, "enc")

    def test_values_stored_as_f32(self, tmp_path):
        v = {"m": np.array([0.1, 0.2])}
        store = load_store(write_text_store(tmp_path / "t.emb", 2, v))
        got = store.mention_vec("m", TEXT, "enc")
        assert got.dtype == np.float64
        np.testing.assert_array_equal(got, np.array([0.1, 0.2], dtype=np.float32).astype(np.float64))

    def test_ecb_scale(self, tmp_path, rng):
        vecs = {f"m{i:04d}": rng.normal(size=768).astype(np.float32) for i in range(1780)}
        store = load_store(write_text_store(tmp_path / "big.emb", 768, vecs))
        assert len(store.mention_ids(TEXT, "enc")) == 1780
        assert store.dim(TEXT, "enc") == 768


class TestValidation:
    def test_dim_mismatch_across_files(self, tmp_path, rng):
        p1 = write_text_store(tmp_path / "a.emb", 8, {"m1": rng.normal(size=8)})
        p2 = write_text_store(tmp_path / "b.emb", 16, {"m2": rng.normal(size=16)})
        with pytest.raises(ValidationError, match="dim 16 conflicts"):
            load_store(p1, p2)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.emb"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(FormatError):
            load_store(path)

    def test_crc_corruption_detected(self, tmp_path, rng):
        path = write_text_store(tmp_path / "t.emb", 4, {"m": rng.normal(size=4)})
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="CRC32"):
            load_store(path)

    def test_non_finite_rejected_on_write(self, tmp_path):
        with pytest.raises(ValidationError, match="non-finite"):
            write_text_store(tmp_path / "t.emb", 2, {"m": np.array([np.nan, 1.0])})

    def test_unknown_version(self, tmp_path, rng):
        path = write_text_store(tmp_path / "t.emb", 2, {"m": rng.normal(size=2)})
        blob = bytearray(path.read_bytes())
        blob[4] = 9  # version little-endian low byte
        import zlib
        import struct
        payload = bytes(blob[:-4])
        path.write_bytes(payload + struct.pack("<I", zlib.crc32(payload)))
        with pytest.raises(FormatError, match="version"):
            load_store(path)

    def test_missing_pair_path_is_fine(self, tmp_path, rng):
        store = load_store(write_text_store(tmp_path / "t.emb", 2, {"m": rng.normal(size=2)}))
        assert store.pair_keys(TEXT, "enc") == []

    def test_non_finite_rejected_on_read(self, tmp_path):
        # hand-build a file carrying a NaN, which the writer refuses to emit
        from cdcr.binio import Writer

        writer = Writer()
        writer.raw(b"EMB1")
        writer.u32(1)
        writer.u8(0)
        writer.str16("enc")
        writer.u32(2)
        writer.u64(1)
        writer.str16("m")
        writer.u8(0)
        writer.raw(np.array([np.nan, 1.0], dtype="<f4").tobytes())
        path = tmp_path / "nan.emb"
        path.write_bytes(writer.finish())
        with pytest.raises(ValidationError, match="non-finite"):
            load_store(path)


class TestPairRepresentation:
    @pytest.fixture
    def store(self, tmp_path):
        mentions = {"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}
        pairs = {("a", "b"): np.array([5.0, 6.0]), ("b", "a"): np.array([7.0, 8.0])}
        return load_store(write_text_store(tmp_path / "s.emb", 2, mentions, pairs))

    def test_ab_layout(self, store):
        rep = build_pair_representation(store, "a", "b", AB, TEXT, "enc")
        np.testing.assert_array_equal(rep.vec, [5, 6, 1, 2, 3, 4, 3, 8])
        assert rep.hidden_dim == 2

    def test_ba_layout_swaps_args(self, store):
        rep = build_pair_representation(store, "a", "b", BA, TEXT, "enc")
        np.testing.assert_array_equal(rep.vec, [7, 8, 3, 4, 1, 2, 3, 8])

    def test_product_block_symmetric_under_swap(self, store):
        ab = build_pair_representation(store, "a", "b", AB, TEXT, "enc")
        ba = build_pair_representation(store, "a", "b", BA, TEXT, "enc")
        np.testing.assert_array_equal(ab.vec[6:], ba.vec[6:])        # product block
        np.testing.assert_array_equal(ab.vec[2:4], ba.vec[4:6])      # args swapped
        np.testing.assert_array_equal(ab.vec[4:6], ba.vec[2:4])

    def test_mean_fallback(self, tmp_path):
        mentions = {"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}
        store = load_store(write_text_store(tmp_path / "nm.emb", 2, mentions))
        rep = build_pair_representation(store, "a", "b", AB, TEXT, "enc", pair_fallback="mean")
        np.testing.assert_array_equal(rep.vec[:2], [2.0, 3.0])

    def test_missing_pair_with_error_fallback(self, tmp_path):
        mentions = {"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])}
        store = load_store(write_text_store(tmp_path / "nm.emb", 2, mentions))
        with pytest.raises(ValidationError, match="ordered pair"):
            build_pair_representation(store, "a", "b", AB, TEXT, "enc")

    def test_missing_mention(self, store):
        with pytest.raises(ValidationError, match="mention 'z'"):
            build_pair_representation(store, "z", "b", AB, TEXT, "enc")

    def test_slicing_round_trip(self, store):
        rep = build_pair_representation(store, "a", "b", AB, TEXT, "enc")
        h = rep.hidden_dim
        pair, a, b, prod = rep.vec[:h], rep.vec[h:2*h], rep.vec[2*h:3*h], rep.vec[3*h:]
        np.testing.assert_array_equal(prod, a * b)
        np.testing.assert_array_equal(pair, store.pair_vec("a", "b", TEXT, "enc"))


class TestFused:
    def _reps(self, tmp_path, rng, direction_text=AB, direction_vision=AB, h=2):
        mentions = {"a": rng.normal(size=h), "b": rng.normal(size=h)}
        tpath = tmp_path / "text.emb"
        vpath = tmp_path / "vis.emb"
        write_embedding_file(tpath, TEXT, "t", h, mentions)
        write_embedding_file(vpath, VISION, "v", h, {k: v + 1 for k, v in mentions.items()})
        store = load_store(tpath, vpath)
        text_rep = build_pair_representation(store, "a", "b", direction_text, TEXT, "t", "mean")
        vis_rep = build_pair_representation(store, "a", "b", direction_vision, VISION, "v", "mean")
        return text_rep, vis_rep

    def test_concatenation(self, tmp_path, rng):
        text_rep, vis_rep = self._reps(tmp_path, rng)
        fused = build_fused(text_rep, vis_rep)
        assert fused.vec.shape == (16,)
        np.testing.assert_array_equal(fused.vec[:8], text_rep.vec)
        np.testing.assert_array_equal(fused.vec[8:], vis_rep.vec)

    def test_h768_gives_6144(self, tmp_path, rng):
        text_rep, vis_rep = self._reps(tmp_path, rng, h=768)
        assert build_fused(text_rep, vis_rep).vec.shape == (6144,)

    def test_direction_mismatch(self, tmp_path, rng):
        text_rep, vis_rep = self._reps(tmp_path, rng, AB, BA)
        with pytest.raises(ValidationError, match="direction"):
            build_fused(text_rep, vis_rep)

    def test_modality_order_enforced(self, tmp_path, rng):
        text_rep, vis_rep = self._reps(tmp_path, rng)
        with pytest.raises(ValidationError, match="text, vision"):
            build_fused(vis_rep, text_rep)
