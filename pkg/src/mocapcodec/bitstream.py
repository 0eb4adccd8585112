"""Self-describing compressed stream container.

Byte layout (all little-endian):

    magic "MCCS" | version u8 | codec u8 (0=frame, 1=clip) | J u16 |
    F u32 | L u16 (0 for the frame codec) | b u8 | segment count u32 |
    max_abs array (f32 each, dimension-major then segment order) |
    value-table symbol count u16 + code lengths (u8 each) |
    gap-table symbol count u16 + code lengths (u8 each) |
    payload bit length u64 | payload bits (zero-padded to a byte) |
    CRC32 (over all preceding bytes)
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .entropy import CanonicalCode
from .errors import FormatMismatchError, StreamCorruptError

STREAM_MAGIC = b"MCCS"
STREAM_VERSION = 1
CODEC_IDS = {"frame": 0, "clip": 1}
CODEC_NAMES = {v: k for k, v in CODEC_IDS.items()}


@dataclass(frozen=True)
class CompressedStream:
    codec: str  # "frame" | "clip"
    J: int
    F: int
    L: int  # 0 for the frame codec
    bits: int
    max_abs: np.ndarray  # (3, segments) float32
    value_lengths: np.ndarray  # uint8 per value symbol
    gap_lengths: np.ndarray  # uint8 per gap symbol
    payload: bytes
    payload_bits: int

    @property
    def segments(self) -> int:
        return self.max_abs.shape[1]

    def value_code(self) -> CanonicalCode:
        return CanonicalCode.from_lengths(self.value_lengths)

    def gap_code(self) -> CanonicalCode:
        return CanonicalCode.from_lengths(self.gap_lengths)

    def to_bytes(self) -> bytes:
        body = struct.pack(
            "<4sBBHIHBI",
            STREAM_MAGIC,
            STREAM_VERSION,
            CODEC_IDS[self.codec],
            self.J,
            self.F,
            self.L,
            self.bits,
            self.segments,
        )
        body += np.ascontiguousarray(self.max_abs, dtype="<f4").tobytes()
        body += struct.pack("<H", len(self.value_lengths))
        body += np.ascontiguousarray(self.value_lengths, dtype=np.uint8).tobytes()
        body += struct.pack("<H", len(self.gap_lengths))
        body += np.ascontiguousarray(self.gap_lengths, dtype=np.uint8).tobytes()
        body += struct.pack("<Q", self.payload_bits)
        body += self.payload
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, raw: bytes) -> "CompressedStream":
        if len(raw) < 4 or raw[:4] != STREAM_MAGIC:
            raise FormatMismatchError("bad stream magic")
        if len(raw) < 8:
            raise StreamCorruptError("stream truncated")
        body, crc_bytes = raw[:-4], raw[-4:]
        if struct.unpack("<I", crc_bytes)[0] != zlib.crc32(body):
            raise StreamCorruptError("stream CRC mismatch")
        head = struct.calcsize("<4sBBHIHBI")
        _, version, codec_id, J, F, L, bits, segments = struct.unpack_from(
            "<4sBBHIHBI", body
        )
        if version != STREAM_VERSION:
            raise FormatMismatchError(f"unsupported stream version {version}")
        if codec_id not in CODEC_NAMES:
            raise FormatMismatchError(f"unknown codec id {codec_id}")
        offset = head
        max_abs = np.frombuffer(body, dtype="<f4", count=3 * segments, offset=offset)
        max_abs = max_abs.reshape(3, segments).copy()
        offset += 4 * 3 * segments
        (nval,) = struct.unpack_from("<H", body, offset)
        offset += 2
        value_lengths = np.frombuffer(body, dtype=np.uint8, count=nval, offset=offset).copy()
        offset += nval
        (ngap,) = struct.unpack_from("<H", body, offset)
        offset += 2
        gap_lengths = np.frombuffer(body, dtype=np.uint8, count=ngap, offset=offset).copy()
        offset += ngap
        (payload_bits,) = struct.unpack_from("<Q", body, offset)
        offset += 8
        payload = body[offset:]
        if len(payload) * 8 < payload_bits:
            raise StreamCorruptError("payload shorter than declared bit length")
        return cls(
            codec=CODEC_NAMES[codec_id],
            J=J,
            F=F,
            L=L,
            bits=bits,
            max_abs=max_abs,
            value_lengths=value_lengths,
            gap_lengths=gap_lengths,
            payload=payload,
            payload_bits=payload_bits,
        )


def write_stream(stream: CompressedStream, path) -> None:
    with open(path, "wb") as fh:
        fh.write(stream.to_bytes())


def read_stream(path) -> CompressedStream:
    with open(path, "rb") as fh:
        return CompressedStream.from_bytes(fh.read())
