"""Frame-based and clip-based compression pipelines.

Frame codec (zero latency): frame 1 is transformed directly, every later
frame is predicted from the previous *reconstructed* frame (closed loop),
the residual is transformed, quantized and entropy coded.  Encoder and
decoder run the same reconstruction arithmetic, so their states never
diverge.

Clip codec (latency bounded by the clip length L): each clip is
temporally decorrelated with a row-wise orthonormal DCT, then spatially
decorrelated with the learned basis; each resulting coefficient column is
coded as one sparse vector.

Payload order is frame-major (dims x,y,z inside a frame) for the frame
codec, and clip-major (dims, then columns, inside a clip) for the clip
codec.  The per-segment scale array in the header is dimension-major.
"""

from __future__ import annotations

import numpy as np

from .bitstream import CompressedStream
from .entropy import (
    BitReader,
    CanonicalCode,
    PayloadBuilder,
    bits_to_bytes,
    bytes_to_bits,
    decode_vector,
    huffman_code_lengths,
    static_tables,
    value_to_symbol,
)
from .errors import DataError, ModelMismatchError
from .motion import DIMS, MotionSequence, partition_clips
from .quantize import QuantizerSpec, f32_upper, quantize_matrix
from .training import TransformModel
from .transforms import dct_matrix


def _check_match(seq_J: int, model: TransformModel):
    if seq_J != model.J:
        raise ModelMismatchError(f"sequence J={seq_J} vs model J={model.J}")


def _sparse_group(q: np.ndarray):
    """Column-wise (counts, gaps, value symbols) of an integer matrix."""
    qT = np.ascontiguousarray(q.T)
    cols, rows = np.nonzero(qT)
    counts = np.count_nonzero(qT, axis=1)
    starts = np.cumsum(counts) - counts
    pos_in_col = np.arange(rows.shape[0]) - starts[cols]
    prev = np.empty_like(rows)
    if rows.shape[0]:
        prev[0] = 0
        prev[1:] = rows[:-1]
    gaps = np.where(pos_in_col == 0, rows, rows - prev - 1)
    return counts, gaps, value_to_symbol(qT[cols, rows])


def _trim(lengths: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(lengths)
    return lengths[: nz[-1] + 1] if nz.size else lengths[:0]


def _build_tables(builder: PayloadBuilder, mode: str, J: int, b: int):
    """Canonical code length arrays for the stream header."""
    if mode == "streaming":
        gap_code, val_code = static_tables(J, b)
        return _trim(gap_code.lengths), _trim(val_code.lengths)
    gap_freq, val_freq = builder.frequencies()
    gap_lengths = (
        _trim(huffman_code_lengths(gap_freq))
        if gap_freq.sum()
        else np.zeros(0, dtype=np.uint8)
    )
    val_lengths = (
        _trim(huffman_code_lengths(val_freq))
        if val_freq.size and val_freq.sum()
        else np.zeros(0, dtype=np.uint8)
    )
    return gap_lengths, val_lengths


def frame_records(frames, bases, b: int):
    """Closed-loop frame codec core.

    ``frames`` is an iterable of (3, J) frame arrays, consumed one at a
    time (no lookahead); yields per frame the (3,) scale row, the sparse
    groups per dimension, the per-dim reconstruction, and the worst
    quantization error in units of the step.
    """
    prev = [None, None, None]
    for frame in frames:
        maxabs_row = np.zeros(3, dtype=np.float64)
        groups = []
        err = 0.0
        for di in range(3):
            B = bases[di]
            target = frame[di] if prev[di] is None else frame[di] - prev[di]
            c = B @ target
            maxabs = f32_upper(float(np.max(np.abs(c)))) if c.size else 0.0
            spec = QuantizerSpec(b, maxabs)
            q = quantize_matrix(c, spec)
            chat = q * spec.step
            if spec.step > 0:
                err = max(err, float(np.max(np.abs(c - chat))) / spec.step)
            recon = B.T @ chat if prev[di] is None else prev[di] + B.T @ chat
            prev[di] = recon
            maxabs_row[di] = maxabs
            counts = np.array([np.count_nonzero(q)], dtype=np.int64)
            locs = np.flatnonzero(q)
            gaps = np.empty(locs.shape[0], dtype=np.int64)
            if locs.shape[0]:
                gaps[0] = locs[0]
                gaps[1:] = np.diff(locs) - 1
            groups.append((counts, gaps, value_to_symbol(q[locs])))
        yield maxabs_row, groups, [p.copy() for p in prev], err


def encode_frame_based(
    seq: MotionSequence,
    model: TransformModel,
    b: int,
    mode: str = "offline",
    return_recon: bool = False,
    return_debug: bool = False,
):
    """Encode with the zero-latency frame codec.

    mode="offline" builds global Huffman tables from the whole stream
    (two passes over the collected symbols); mode="streaming" uses fixed
    pre-built tables so frames can be emitted as they arrive.
    """
    _check_match(seq.J, model)
    if mode not in ("offline", "streaming"):
        raise DataError(f"unknown frame-codec mode {mode!r}")
    bases = [model.bases[d] for d in DIMS]
    builder = PayloadBuilder(seq.J)
    max_abs = np.zeros((3, seq.F), dtype=np.float64)
    recons = []
    worst_err = 0.0
    for i, (maxabs_row, groups, recon, err) in enumerate(
        frame_records(seq.frames().transpose(0, 2, 1), bases, b)
    ):
        max_abs[:, i] = maxabs_row
        for g in groups:
            builder.add_group(*g)
        worst_err = max(worst_err, err)
        if return_recon:
            recons.append(recon)
    gap_lengths, val_lengths = _build_tables(builder, mode, seq.J, b)
    bits = builder.pack(
        CanonicalCode.from_lengths(gap_lengths), CanonicalCode.from_lengths(val_lengths)
    )
    stream = CompressedStream(
        codec="frame",
        J=seq.J,
        F=seq.F,
        L=0,
        bits=b,
        max_abs=max_abs.astype(np.float32),
        value_lengths=val_lengths,
        gap_lengths=gap_lengths,
        payload=bits_to_bytes(bits),
        payload_bits=int(bits.shape[0]),
    )
    out = [stream]
    if return_recon:
        out.append(recons)
    if return_debug:
        out.append({"max_q_error_over_step": worst_err})
    return out[0] if len(out) == 1 else tuple(out)


def stream_frame_payload(frames, model: TransformModel, b: int, gap_code, val_code):
    """Yield the payload bit chunk of each frame as it is consumed.

    Concatenating the chunks reproduces the batch payload bit-for-bit
    when the same Huffman tables are used.
    """
    bases = [model.bases[d] for d in DIMS]
    J = model.J
    for maxabs_row, groups, _, _ in frame_records(frames, bases, b):
        builder = PayloadBuilder(J)
        for g in groups:
            builder.add_group(*g)
        yield builder.pack(gap_code, val_code), maxabs_row


def decode_frame_based(
    stream: CompressedStream, model: TransformModel, frame_rate: float = 120.0
) -> MotionSequence:
    if stream.codec != "frame":
        raise ModelMismatchError(f"stream codec is {stream.codec!r}, expected 'frame'")
    _check_match(stream.J, model)
    if stream.segments != stream.F:
        raise ModelMismatchError("frame stream segment count does not match F")
    J, F, b = stream.J, stream.F, stream.bits
    gap_code, val_code = stream.gap_code(), stream.value_code()
    reader = BitReader(bytes_to_bits(stream.payload, stream.payload_bits))
    bases = [model.bases[d] for d in DIMS]
    data = np.zeros((3, J, F))
    prev = [None, None, None]
    for i in range(F):
        for di in range(3):
            code = decode_vector(reader, J, gap_code, val_code)
            spec = QuantizerSpec(b, float(stream.max_abs[di, i]))
            chat = np.zeros(J)
            if code.count:
                chat[code.locations] = code.values * spec.step
            B = bases[di]
            recon = B.T @ chat if prev[di] is None else prev[di] + B.T @ chat
            prev[di] = recon
            data[di, :, i] = recon
    return MotionSequence(data, frame_rate=frame_rate)


def encode_clip_based(
    seq: MotionSequence,
    model: TransformModel,
    L: int,
    b: int,
    return_debug: bool = False,
):
    """Encode with the clip codec (temporal DCT + learned spatial basis)."""
    _check_match(seq.J, model)
    if L < 1:
        raise DataError(f"clip length must be >= 1, got {L}")
    clips = partition_clips(seq, L)
    bases = [model.bases[d] for d in DIMS]
    dct_cache: dict[int, np.ndarray] = {}
    builder = PayloadBuilder(seq.J)
    max_abs = np.zeros((3, len(clips)), dtype=np.float64)
    worst_err = 0.0
    for ci, clip in enumerate(clips):
        Lc = clip.length
        Ut = dct_cache.get(Lc)
        if Ut is None:
            Ut = dct_cache.setdefault(Lc, dct_matrix(Lc).matrix)
        for di in range(3):
            C = bases[di] @ (clip.data[di] @ Ut)
            maxabs = f32_upper(float(np.max(np.abs(C)))) if C.size else 0.0
            spec = QuantizerSpec(b, maxabs)
            q = quantize_matrix(C, spec)
            if return_debug and spec.step > 0:
                worst_err = max(
                    worst_err, float(np.max(np.abs(C - q * spec.step))) / spec.step
                )
            max_abs[di, ci] = maxabs
            builder.add_group(*_sparse_group(q))
    gap_lengths, val_lengths = _build_tables(builder, "offline", seq.J, b)
    bits = builder.pack(
        CanonicalCode.from_lengths(gap_lengths), CanonicalCode.from_lengths(val_lengths)
    )
    stream = CompressedStream(
        codec="clip",
        J=seq.J,
        F=seq.F,
        L=L,
        bits=b,
        max_abs=max_abs.astype(np.float32),
        value_lengths=val_lengths,
        gap_lengths=gap_lengths,
        payload=bits_to_bytes(bits),
        payload_bits=int(bits.shape[0]),
    )
    if return_debug:
        return stream, {"max_q_error_over_step": worst_err}
    return stream


def decode_clip_based(
    stream: CompressedStream, model: TransformModel, frame_rate: float = 120.0
) -> MotionSequence:
    if stream.codec != "clip":
        raise ModelMismatchError(f"stream codec is {stream.codec!r}, expected 'clip'")
    _check_match(stream.J, model)
    J, F, L, b = stream.J, stream.F, stream.L, stream.bits
    n_clips = (F + L - 1) // L
    if stream.segments != n_clips:
        raise ModelMismatchError("clip stream segment count does not match F and L")
    gap_code, val_code = stream.gap_code(), stream.value_code()
    reader = BitReader(bytes_to_bits(stream.payload, stream.payload_bits))
    bases = [model.bases[d] for d in DIMS]
    dct_cache: dict[int, np.ndarray] = {}
    data = np.zeros((3, J, F))
    for ci in range(n_clips):
        start = ci * L
        Lc = min(L, F - start)
        Ut = dct_cache.get(Lc)
        if Ut is None:
            Ut = dct_cache.setdefault(Lc, dct_matrix(Lc).matrix)
        for di in range(3):
            spec = QuantizerSpec(b, float(stream.max_abs[di, ci]))
            Chat = np.zeros((J, Lc))
            for col in range(Lc):
                code = decode_vector(reader, J, gap_code, val_code)
                if code.count:
                    Chat[code.locations, col] = code.values * spec.step
            data[di, :, start : start + Lc] = (bases[di].T @ Chat) @ Ut.T
    return MotionSequence(data, frame_rate=frame_rate)


def encode(seq, model, codec: str, b: int, L: int = 240, mode: str = "offline"):
    """Dispatch helper used by the CLI and benchmark harness."""
    if codec == "frame":
        return encode_frame_based(seq, model, b, mode=mode)
    if codec == "clip":
        return encode_clip_based(seq, model, L, b)
    raise DataError(f"unknown codec {codec!r}")


def decode(stream: CompressedStream, model, frame_rate: float = 120.0) -> MotionSequence:
    if stream.codec == "frame":
        return decode_frame_based(stream, model, frame_rate)
    return decode_clip_based(stream, model, frame_rate)
