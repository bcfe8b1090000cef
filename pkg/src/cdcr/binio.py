"""Little-endian binary framing shared by the embedding, map, and scorer files.

All container formats follow the same envelope: a 4-byte magic, a u32
version, format-specific payload, and a trailing CRC32 (zlib) computed
over every byte that precedes it.
"""

from __future__ import annotations

import struct
import zlib
from io import BytesIO

from .errors import FormatError


class Writer:
    """Accumulates little-endian fields and finishes with the CRC32 tail."""

    def __init__(self) -> None:
        self._buf = BytesIO()

    def raw(self, data: bytes) -> None:
        self._buf.write(data)

    def u8(self, value: int) -> None:
        self._buf.write(struct.pack("<B", value))

    def u16(self, value: int) -> None:
        self._buf.write(struct.pack("<H", value))

    def u32(self, value: int) -> None:
        self._buf.write(struct.pack("<I", value))

    def u64(self, value: int) -> None:
        self._buf.write(struct.pack("<Q", value))

    def f64(self, value: float) -> None:
        self._buf.write(struct.pack("<d", value))

    def str16(self, text: str) -> None:
        data = text.encode("utf-8")
        if len(data) > 0xFFFF:
            raise FormatError(f"string field too long ({len(data)} bytes)")
        self.u16(len(data))
        self.raw(data)

    def finish(self) -> bytes:
        payload = self._buf.getvalue()
        return payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


class Reader:
    """Cursor over a checksummed byte blob; verifies the CRC32 up front."""

    def __init__(self, data: bytes, what: str) -> None:
        if len(data) < 4:
            raise FormatError(f"{what}: truncated file ({len(data)} bytes)")
        payload, tail = data[:-4], data[-4:]
        (stored,) = struct.unpack("<I", tail)
        actual = zlib.crc32(payload) & 0xFFFFFFFF
        if stored != actual:
            raise FormatError(
                f"{what}: CRC32 mismatch (stored {stored:#010x}, computed {actual:#010x})"
            )
        self._data = payload
        self._pos = 0
        self._what = what

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise FormatError(f"{self._what}: truncated at byte {self._pos}")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def str16(self) -> str:
        n = self.u16()
        return self._take(n).decode("utf-8")

    def expect_magic(self, magic: bytes) -> None:
        got = self._take(len(magic))
        if got != magic:
            raise FormatError(f"{self._what}: bad magic {got!r} (expected {magic!r})")

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise FormatError(
                f"{self._what}: {len(self._data) - self._pos} trailing bytes after last record"
            )
