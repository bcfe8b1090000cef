"""Embedding storage and pairwise representation building.

Vectors live in EMB1 binary files, one (modality, encoder) series per
file, holding per-mention records and/or ordered-pair records. Values
are stored as little-endian f32 and widened to f64 for all arithmetic.

EMB1 layout: magic "EMB1", version u32=1, modality u8 (0=text,
1=vision), encoder name (u16 length + UTF-8), dim u32, count u64; then
per record: id (u16 length + UTF-8; ordered pairs store
"first\\x00second"), kind u8 (0=mention, 1=pair), dim f32 values;
trailing CRC32 over all preceding bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .binio import Reader, Writer
from .errors import FormatError, ValidationError

TEXT = "text"
VISION = "vision"
_MODALITY_CODES = {TEXT: 0, VISION: 1}
_MODALITY_NAMES = {0: TEXT, 1: VISION}

AB = "AB"
BA = "BA"

_MAGIC = b"EMB1"
_VERSION = 1
_KIND_MENTION = 0
_KIND_PAIR = 1


@dataclass(frozen=True)
class EmbeddingRecord:
    mention_id: str
    modality: str
    encoder: str
    vec: np.ndarray

    @property
    def dim(self) -> int:
        return self.vec.shape[0]


@dataclass(frozen=True)
class PairEmbeddingRecord:
    first: str
    second: str
    modality: str
    encoder: str
    vec: np.ndarray

    @property
    def dim(self) -> int:
        return self.vec.shape[0]


@dataclass(frozen=True)
class PairRepresentation:
    """4H concatenation [pair | arg1 | arg2 | arg1 * arg2] for one direction."""

    direction: str
    modality: str
    encoder: str
    vec: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.vec.shape[0] // 4


@dataclass(frozen=True)
class FusedRepresentation:
    """Text 4H block followed by vision 4H block (8H total)."""

    direction: str
    vec: np.ndarray


def _check_finite(vec: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(vec)):
        raise ValidationError(f"{what}: non-finite value in vector")


class EmbeddingStore:
    """Read-only lookup of mention and ordered-pair vectors by (modality, encoder)."""

    def __init__(self) -> None:
        self._dims: dict[tuple[str, str], int] = {}
        self._mentions: dict[tuple[str, str], dict[str, np.ndarray]] = {}
        self._pairs: dict[tuple[str, str], dict[tuple[str, str], np.ndarray]] = {}

    def add_file(self, path: str | Path) -> None:
        path = Path(path)
        reader = Reader(path.read_bytes(), path.name)
        reader.expect_magic(_MAGIC)
        version = reader.u32()
        if version != _VERSION:
            raise FormatError(f"{path.name}: unsupported version {version}")
        modality_code = reader.u8()
        if modality_code not in _MODALITY_NAMES:
            raise FormatError(f"{path.name}: unknown modality code {modality_code}")
        modality = _MODALITY_NAMES[modality_code]
        encoder = reader.str16()
        dim = reader.u32()
        count = reader.u64()
        if dim == 0:
            raise FormatError(f"{path.name}: zero dim")

        key = (modality, encoder)
        known = self._dims.get(key)
        if known is not None and known != dim:
            raise ValidationError(
                f"{path.name}: dim {dim} conflicts with dim {known} already "
                f"loaded for ({modality}, {encoder})"
            )
        self._dims[key] = dim
        mentions = self._mentions.setdefault(key, {})
        pairs = self._pairs.setdefault(key, {})

        for _ in range(count):
            rec_id = reader.str16()
            kind = reader.u8()
            raw = reader.raw(4 * dim)
            vec = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            _check_finite(vec, f"{path.name} record {rec_id!r}")
            if kind == _KIND_MENTION:
                mentions[rec_id] = vec
            elif kind == _KIND_PAIR:
                if rec_id.count("\x00") != 1:
                    raise FormatError(f"{path.name}: malformed pair id {rec_id!r}")
                first, second = rec_id.split("\x00")
                pairs[(first, second)] = vec
            else:
                raise FormatError(f"{path.name}: unknown record kind {kind}")
        reader.expect_end()

    def series(self) -> list[tuple[str, str, int]]:
        """Loaded (modality, encoder, dim) triples, sorted."""
        return sorted((m, e, d) for (m, e), d in self._dims.items())

    def dim(self, modality: str, encoder: str) -> int:
        try:
            return self._dims[(modality, encoder)]
        except KeyError:
            raise ValidationError(f"no embeddings loaded for ({modality}, {encoder})") from None

    def mention_ids(self, modality: str, encoder: str) -> list[str]:
        return sorted(self._mentions.get((modality, encoder), {}))

    def pair_keys(self, modality: str, encoder: str) -> list[tuple[str, str]]:
        return sorted(self._pairs.get((modality, encoder), {}))

    def mention_vec(self, mention_id: str, modality: str, encoder: str) -> np.ndarray:
        table = self._mentions.get((modality, encoder), {})
        try:
            return table[mention_id]
        except KeyError:
            raise ValidationError(
                f"no {modality}/{encoder} vector for mention {mention_id!r}"
            ) from None

    def has_pair(self, first: str, second: str, modality: str, encoder: str) -> bool:
        return (first, second) in self._pairs.get((modality, encoder), {})

    def pair_vec(self, first: str, second: str, modality: str, encoder: str) -> np.ndarray:
        table = self._pairs.get((modality, encoder), {})
        try:
            return table[(first, second)]
        except KeyError:
            raise ValidationError(
                f"no {modality}/{encoder} vector for ordered pair ({first!r}, {second!r})"
            ) from None


def load_store(mention_path: str | Path, pair_path: str | Path | None = None) -> EmbeddingStore:
    """Load an embedding store from a mention file and an optional pair file."""
    store = EmbeddingStore()
    store.add_file(mention_path)
    if pair_path is not None:
        store.add_file(pair_path)
    return store


def write_embedding_file(
    path: str | Path,
    modality: str,
    encoder: str,
    dim: int,
    mention_vecs: dict[str, np.ndarray] | None = None,
    pair_vecs: dict[tuple[str, str], np.ndarray] | None = None,
) -> None:
    """Write an EMB1 file; mention records first, then ordered-pair records."""
    if modality not in _MODALITY_CODES:
        raise ValidationError(f"unknown modality {modality!r}")
    mention_vecs = mention_vecs or {}
    pair_vecs = pair_vecs or {}

    writer = Writer()
    writer.raw(_MAGIC)
    writer.u32(_VERSION)
    writer.u8(_MODALITY_CODES[modality])
    writer.str16(encoder)
    writer.u32(dim)
    writer.u64(len(mention_vecs) + len(pair_vecs))

    def emit(rec_id: str, kind: int, vec: np.ndarray) -> None:
        arr = np.asarray(vec, dtype="<f4")
        if arr.shape != (dim,):
            raise ValidationError(f"record {rec_id!r}: expected {dim} values, got {arr.shape}")
        _check_finite(arr, f"record {rec_id!r}")
        writer.str16(rec_id)
        writer.u8(kind)
        writer.raw(arr.tobytes())

    for mention_id in sorted(mention_vecs):
        emit(mention_id, _KIND_MENTION, mention_vecs[mention_id])
    for first, second in sorted(pair_vecs):
        emit(f"{first}\x00{second}", _KIND_PAIR, pair_vecs[(first, second)])

    Path(path).write_bytes(writer.finish())


def build_pair_representation(
    store: EmbeddingStore,
    a: str,
    b: str,
    direction: str,
    modality: str,
    encoder: str,
    pair_fallback: str = "error",
) -> PairRepresentation:
    """Concatenate [pair | arg1 | arg2 | arg1 * arg2] for the given direction.

    Direction AB keeps (a, b) argument order, BA swaps it; the leading
    block is the ordered-pair vector for that order. With
    pair_fallback="mean" a missing ordered-pair vector is replaced by
    the mean of the two mention vectors (an explicit approximation,
    never applied silently).
    """
    if direction not in (AB, BA):
        raise ValidationError(f"unknown direction {direction!r}")
    if pair_fallback not in ("error", "mean"):
        raise ValidationError(f"unknown pair_fallback {pair_fallback!r}")
    first, second = (a, b) if direction == AB else (b, a)
    arg1 = store.mention_vec(first, modality, encoder)
    arg2 = store.mention_vec(second, modality, encoder)
    if store.has_pair(first, second, modality, encoder):
        pair = store.pair_vec(first, second, modality, encoder)
    elif pair_fallback == "mean":
        pair = (arg1 + arg2) / 2.0
    else:
        raise ValidationError(
            f"no {modality}/{encoder} vector for ordered pair ({first!r}, {second!r}) "
            "and pair_fallback is 'error'"
        )
    vec = np.concatenate([pair, arg1, arg2, arg1 * arg2])
    return PairRepresentation(direction=direction, modality=modality, encoder=encoder, vec=vec)


def build_fused(text_rep: PairRepresentation, vision_rep: PairRepresentation) -> FusedRepresentation:
    """Concatenate a text and a vision 4H representation into one 8H vector."""
    if text_rep.modality != TEXT or vision_rep.modality != VISION:
        raise ValidationError(
            f"expected (text, vision) representations, got "
            f"({text_rep.modality}, {vision_rep.modality})"
        )
    if text_rep.direction != vision_rep.direction:
        raise ValidationError(
            f"direction mismatch: {text_rep.direction} vs {vision_rep.direction}"
        )
    if text_rep.vec.shape != vision_rep.vec.shape:
        raise ValidationError(
            f"dim mismatch: {text_rep.vec.shape[0]} vs {vision_rep.vec.shape[0]}"
        )
    return FusedRepresentation(
        direction=text_rep.direction,
        vec=np.concatenate([text_rep.vec, vision_rep.vec]),
    )
