"""Canonical Huffman coding and bit-level payload packing.

Symbols are small integer indices:

* nonzero quantized values map through a zigzag (1 -> 0, -1 -> 1,
  2 -> 2, -2 -> 3, ...), so the alphabet is contiguous and the decoder
  can rebuild it from the table size alone;
* nonzero locations are coded as gaps (first location, then successive
  differences minus one), indices in [0, n).

Codes are canonical: reconstructible from the per-symbol code lengths,
shorter codes first, ties broken by symbol order.  Each coded vector
contributes a fixed-width nonzero count, then its gap codes, then its
value codes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import DataError, StreamCorruptError
from .quantize import SparseVectorCode

MAX_CODE_LEN = 64


def value_to_symbol(values: np.ndarray) -> np.ndarray:
    """Zigzag map of nonzero signed integers to nonnegative indices."""
    v = np.asarray(values, dtype=np.int64)
    return 2 * (np.abs(v) - 1) + (v < 0)


def symbol_to_value(symbols: np.ndarray) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.int64)
    mag = s // 2 + 1
    return np.where(s % 2 == 1, -mag, mag)


def count_field_bits(n: int) -> int:
    """Fixed width of the per-vector nonzero count: ceil(log2(n+1))."""
    return int(n).bit_length()


def huffman_code_lengths(freqs: np.ndarray) -> np.ndarray:
    """Optimal prefix code lengths for an array of symbol frequencies.

    Entries with zero frequency get length 0 (symbol absent).  A single
    present symbol gets length 1 so no codeword is empty.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    present = np.flatnonzero(freqs > 0)
    if present.size == 0:
        raise DataError("empty frequency map")
    lengths = np.zeros(freqs.shape[0], dtype=np.uint8)
    if present.size == 1:
        lengths[present[0]] = 1
        return lengths
    # Standard heap-based Huffman; parent pointers give leaf depths.
    heap = [(float(freqs[s]), i, i) for i, s in enumerate(present)]
    heapq.heapify(heap)
    parent = {}
    next_id = present.size
    while len(heap) > 1:
        w1, _, n1 = heapq.heappop(heap)
        w2, _, n2 = heapq.heappop(heap)
        parent[n1] = next_id
        parent[n2] = next_id
        heapq.heappush(heap, (w1 + w2, next_id, next_id))
        next_id += 1
    for i, s in enumerate(present):
        depth = 0
        node = i
        while node in parent:
            node = parent[node]
            depth += 1
        if depth > MAX_CODE_LEN:
            raise DataError(f"Huffman code length {depth} exceeds {MAX_CODE_LEN}")
        lengths[s] = depth
    return lengths


def huffman_build(frequencies: dict) -> dict:
    """Map symbol -> canonical code length for a symbol->count mapping."""
    if not frequencies:
        raise DataError("empty frequency map")
    symbols = sorted(frequencies)
    freqs = np.array([frequencies[s] for s in symbols], dtype=np.float64)
    lengths = huffman_code_lengths(freqs)
    return {s: int(l) for s, l in zip(symbols, lengths) if l > 0}


@dataclass(frozen=True)
class CanonicalCode:
    """Canonical prefix code built from per-symbol code lengths."""

    lengths: np.ndarray  # uint8, 0 = absent symbol
    codes: np.ndarray  # uint64 codeword per symbol (0 for absent)
    # decoder side, indexed by code length
    first_code: np.ndarray
    first_index: np.ndarray
    sorted_symbols: np.ndarray
    max_length: int

    @classmethod
    def from_lengths(cls, lengths: np.ndarray) -> "CanonicalCode":
        lengths = np.asarray(lengths, dtype=np.uint8)
        present = np.flatnonzero(lengths)
        if present.size == 0:
            return cls(
                lengths=lengths,
                codes=np.zeros(lengths.shape[0], dtype=np.uint64),
                first_code=np.zeros(1, dtype=np.int64),
                first_index=np.zeros(1, dtype=np.int64),
                sorted_symbols=np.zeros(0, dtype=np.int64),
                max_length=0,
            )
        max_len = int(lengths[present].max())
        if max_len > MAX_CODE_LEN:
            raise DataError(f"code length {max_len} exceeds {MAX_CODE_LEN}")
        order = present[np.lexsort((present, lengths[present]))]
        bl_count = np.bincount(lengths[present], minlength=max_len + 1)
        first_code = np.zeros(max_len + 2, dtype=np.int64)
        code = 0
        for l in range(1, max_len + 1):
            code = (code + bl_count[l - 1]) << 1
            first_code[l] = code
        if first_code[max_len] + bl_count[max_len] > (1 << max_len):
            raise DataError("code lengths violate the Kraft inequality")
        codes = np.zeros(lengths.shape[0], dtype=np.uint64)
        next_code = first_code.copy()
        for s in order:
            codes[s] = next_code[lengths[s]]
            next_code[lengths[s]] += 1
        first_index = np.zeros(max_len + 2, dtype=np.int64)
        first_index[1:] = np.cumsum(bl_count)[: max_len + 1]
        return cls(
            lengths=lengths,
            codes=codes,
            first_code=first_code,
            first_index=first_index,
            sorted_symbols=order,
            max_length=max_len,
        )

    @property
    def symbol_count(self) -> int:
        return self.lengths.shape[0]


def pack_bits(codes: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenate variable-length codewords MSB-first into a 0/1 bit array."""
    codes = np.asarray(codes, dtype=np.uint64)
    lengths = np.asarray(lengths, dtype=np.int64)
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.uint8)
    ends = np.cumsum(lengths)
    starts = ends - lengths
    owner = np.repeat(np.arange(lengths.shape[0]), lengths)
    intra = np.arange(total) - starts[owner]
    shift = (lengths[owner] - 1 - intra).astype(np.uint64)
    return ((codes[owner] >> shift) & np.uint64(1)).astype(np.uint8)


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(bits).tobytes()


def bytes_to_bits(data: bytes, bitlen: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if bits.shape[0] < bitlen:
        raise StreamCorruptError("payload shorter than its declared bit length")
    return bits[:bitlen]


class BitReader:
    """Sequential reader over a 0/1 bit array."""

    def __init__(self, bits: np.ndarray):
        self.bits = bits
        self.pos = 0

    def read_fixed(self, nbits: int) -> int:
        end = self.pos + nbits
        if end > self.bits.shape[0]:
            raise StreamCorruptError("truncated payload (fixed field)")
        value = 0
        for b in self.bits[self.pos : end]:
            value = (value << 1) | int(b)
        self.pos = end
        return value

    def read_symbol(self, code: CanonicalCode) -> int:
        value = 0
        length = 0
        bits = self.bits
        n = bits.shape[0]
        while length < code.max_length:
            if self.pos >= n:
                raise StreamCorruptError("truncated payload (huffman symbol)")
            value = (value << 1) | int(bits[self.pos])
            self.pos += 1
            length += 1
            offset = value - code.first_code[length]
            if 0 <= offset < code.first_index[length + 1] - code.first_index[length]:
                return int(code.sorted_symbols[code.first_index[length] + offset])
        raise StreamCorruptError("invalid codeword in payload")


class PayloadBuilder:
    """Accumulates coded vectors and packs the interleaved payload.

    Vectors are added in payload order, possibly as vectorized groups
    (several columns at once).  Frequencies are available before packing
    so global tables can be built over the whole stream.
    """

    def __init__(self, n: int):
        self.n = n
        self.count_bits = count_field_bits(n)
        self._counts = []
        self._gaps = []
        self._valsyms = []
        self._ngroups = 0

    def add_group(self, counts: np.ndarray, gaps: np.ndarray, valsyms: np.ndarray):
        self._counts.append(np.asarray(counts, dtype=np.int64))
        self._gaps.append(np.asarray(gaps, dtype=np.int64))
        self._valsyms.append(np.asarray(valsyms, dtype=np.int64))
        self._ngroups += 1

    def add_code(self, code: SparseVectorCode):
        locs = code.locations
        gaps = np.empty(code.count, dtype=np.int64)
        if code.count:
            gaps[0] = locs[0]
            gaps[1:] = np.diff(locs) - 1
        self.add_group(np.array([code.count]), gaps, value_to_symbol(code.values))

    @property
    def num_vectors(self) -> int:
        return sum(c.shape[0] for c in self._counts)

    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """(gap frequencies over [0, n), value-symbol frequencies)."""
        gaps = np.concatenate(self._gaps) if self._gaps else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(self._valsyms) if self._valsyms else np.zeros(0, dtype=np.int64)
        gap_freq = np.bincount(gaps, minlength=self.n)
        val_freq = np.bincount(vals) if vals.size else np.zeros(0, dtype=np.int64)
        return gap_freq, val_freq

    def pack(self, gap_code: CanonicalCode, val_code: CanonicalCode) -> np.ndarray:
        """Interleave count fields, gap codes and value codes per vector."""
        counts = np.concatenate(self._counts) if self._counts else np.zeros(0, dtype=np.int64)
        gaps = np.concatenate(self._gaps) if self._gaps else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(self._valsyms) if self._valsyms else np.zeros(0, dtype=np.int64)
        nvec = counts.shape[0]
        nnz = gaps.shape[0]
        vec_of_nz = np.repeat(np.arange(nvec), counts)
        starts = np.cumsum(counts) - counts
        pos_in_vec = np.arange(nnz) - starts[vec_of_nz]

        evec = np.concatenate([np.arange(nvec), vec_of_nz, vec_of_nz])
        ephase = np.concatenate(
            [np.zeros(nvec, np.int8), np.ones(nnz, np.int8), np.full(nnz, 2, np.int8)]
        )
        epos = np.concatenate([np.zeros(nvec, np.int64), pos_in_vec, pos_in_vec])
        ecodes = np.concatenate(
            [
                counts.astype(np.uint64),
                gap_code.codes[gaps],
                val_code.codes[vals],
            ]
        )
        elens = np.concatenate(
            [
                np.full(nvec, self.count_bits, np.int64),
                gap_code.lengths[gaps].astype(np.int64),
                val_code.lengths[vals].astype(np.int64),
            ]
        )
        if np.any(elens[nvec:] == 0):
            raise DataError("symbol missing from Huffman table")
        order = np.lexsort((epos, ephase, evec))
        return pack_bits(ecodes[order], elens[order])


def encode_payload(
    codes, n: int, gap_code: CanonicalCode, val_code: CanonicalCode
) -> tuple[bytes, int]:
    """Serialize a list of SparseVectorCode into (payload bytes, bit length)."""
    builder = PayloadBuilder(n)
    for code in codes:
        builder.add_code(code)
    bits = builder.pack(gap_code, val_code)
    return bits_to_bytes(bits), int(bits.shape[0])


def decode_vector(reader: BitReader, n: int, gap_code, val_code) -> SparseVectorCode:
    count = reader.read_fixed(count_field_bits(n))
    if count > n:
        raise StreamCorruptError(f"vector count {count} exceeds length {n}")
    gaps = np.array([reader.read_symbol(gap_code) for _ in range(count)], dtype=np.int64)
    syms = np.array([reader.read_symbol(val_code) for _ in range(count)], dtype=np.int64)
    locs = np.cumsum(gaps + 1) - 1 if count else gaps
    if count and locs[-1] >= n:
        raise StreamCorruptError("decoded location outside vector")
    return SparseVectorCode(count=count, locations=locs, values=symbol_to_value(syms))


def decode_payload(
    payload: bytes, bitlen: int, num_vectors: int, n: int, gap_code, val_code
) -> list[SparseVectorCode]:
    """Exact inverse of encode_payload."""
    reader = BitReader(bytes_to_bits(payload, bitlen))
    return [decode_vector(reader, n, gap_code, val_code) for _ in range(num_vectors)]


def static_tables(n: int, bits: int) -> tuple[CanonicalCode, CanonicalCode]:
    """Deterministic pre-built tables covering the whole alphabet.

    Used by the streaming frame-codec mode, where global frequencies are
    unavailable before the first frame is emitted.  Weights decay with
    gap size and value magnitude (halving per magnitude doubling), which
    keeps every code length well under the u8 limit.
    """
    gap_idx = np.arange(n)
    gap_freq = np.maximum((1 << 16) >> np.minimum(gap_idx, 60), 1)
    nvals = 2 * ((1 << (bits - 1)) - 1)
    mag = np.arange(nvals) // 2 + 1
    shift = np.frexp(mag.astype(np.float64))[1]  # ~log2(mag)+1
    val_freq = np.maximum((1 << 20) >> np.minimum(shift, 60), 1)
    gap_code = CanonicalCode.from_lengths(huffman_code_lengths(gap_freq))
    val_code = CanonicalCode.from_lengths(huffman_code_lengths(val_freq))
    return gap_code, val_code
