"""Distortion and compression-ratio metrics plus evaluation protocols.

Distortion is the mean Euclidean distance between original and
reconstructed joint positions over all joints and frames, in the source
length unit.  The compression ratio counts 96 bits per key point per
frame as the original size and the full serialized stream (header and
CRC included) as the compressed size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import codec as codec_mod
from .bitstream import CompressedStream
from .errors import DataError, InvalidSweepError, ShapeMismatchError
from .motion import DIMS, MotionSequence
from .training import TransformModel
from .transforms import (
    dct_matrix,
    haar_matrix,
    haar_padded_size,
    truncate_columns,
)

ORIGINAL_BITS_PER_POINT = 96


@dataclass(frozen=True)
class RDPoint:
    codec: str
    L: int  # 0 for the frame codec
    b: int
    CR: float
    D: float


@dataclass(frozen=True)
class SparsityPoint:
    transform: str
    fraction: float
    D: float


def _check_shapes(orig: MotionSequence, recon: MotionSequence):
    if orig.data.shape != recon.data.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {orig.data.shape} vs {recon.data.shape}"
        )


def _joint_errors(orig: MotionSequence, recon: MotionSequence) -> np.ndarray:
    """(J, F) Euclidean distances between matching joint positions."""
    diff = orig.data - recon.data
    return np.sqrt(np.sum(diff * diff, axis=0))


def distortion(orig: MotionSequence, recon: MotionSequence) -> float:
    """Mean Euclidean joint position error over all joints and frames."""
    _check_shapes(orig, recon)
    return float(np.mean(_joint_errors(orig, recon)))


def per_joint_distortion(orig: MotionSequence, recon: MotionSequence) -> np.ndarray:
    """Per-joint mean position error; its mean equals distortion()."""
    _check_shapes(orig, recon)
    return np.mean(_joint_errors(orig, recon), axis=1)


def compression_ratio(F: int, J: int, stream: CompressedStream) -> float:
    """Original bits (96 per key point) over total serialized stream bits."""
    return (F * J * ORIGINAL_BITS_PER_POINT) / (8 * len(stream.to_bytes()))


def _spatial_transform(transform, J: int, model: TransformModel | None):
    """(forward, inverse) callables acting on J-by-F frame-vector matrices."""
    if isinstance(transform, TransformModel):
        model, transform = transform, "lsdt"
    if transform == "lsdt":
        if model is None:
            raise DataError("lsdt transform requires a TransformModel")
        if model.J != J:
            raise ShapeMismatchError(f"model J={model.J} vs sequence J={J}")
        return (
            lambda M, di: model.bases[DIMS[di]] @ M,
            lambda G, di: model.bases[DIMS[di]].T @ G,
        )
    if transform == "dct":
        B = dct_matrix(J).matrix.T  # column-vector application
        return (lambda M, di: B @ M, lambda G, di: B.T @ G)
    if transform == "dwt":
        levels = 3
        n_pad = haar_padded_size(J, levels)
        H = haar_matrix(n_pad, levels)
        Hj = H[:, :J]  # forward of a zero-padded vector
        return (lambda M, di: Hj @ M, lambda G, di: Hj.T @ G)
    raise DataError(f"unknown transform {transform!r}")


def sparsity_distortion_curve(
    seq: MotionSequence,
    transform,
    fractions,
    model: TransformModel | None = None,
) -> list[SparsityPoint]:
    """Distortion after keeping only a fraction of transform coefficients.

    Per frame and dimension the frame vector is transformed, the
    ceil(f*J) largest-magnitude coefficients are kept (no quantization),
    and the frame is reconstructed by the inverse transform.
    """
    name = "lsdt" if isinstance(transform, TransformModel) else str(transform)
    fwd, inv = _spatial_transform(transform, seq.J, model)
    points = []
    for f in fractions:
        if not 0 < f <= 1:
            raise DataError(f"fraction {f} outside (0, 1]")
        keep = math.ceil(f * seq.J)
        recon = np.empty_like(seq.data)
        for di in range(3):
            G = fwd(seq.data[di], di)
            recon[di] = inv(truncate_columns(G, min(keep, G.shape[0])), di)
        points.append(
            SparsityPoint(
                transform=name,
                fraction=f,
                D=distortion(seq, MotionSequence(recon, seq.frame_rate)),
            )
        )
    return points


def rd_sweep(
    seq: MotionSequence,
    model: TransformModel,
    codec: str,
    b_values,
    L_values=(240,),
) -> list[RDPoint]:
    """Encode/decode the sequence over a parameter grid and record RD points.

    codec is "frame", "clip" or "both"; the frame codec ignores L_values.
    """
    b_values = list(b_values)
    L_values = list(L_values)
    if not b_values:
        raise InvalidSweepError("empty bit-depth list")
    if codec not in ("frame", "clip", "both"):
        raise DataError(f"unknown codec {codec!r}")
    configs = []
    if codec in ("frame", "both"):
        configs += [("frame", 0, b) for b in b_values]
    if codec in ("clip", "both"):
        if not L_values:
            raise InvalidSweepError("empty clip-length list")
        configs += [("clip", L, b) for b in b_values for L in L_values]
    points = []
    for cname, L, b in sorted(configs):
        stream = codec_mod.encode(seq, model, cname, b, L=max(L, 1))
        recon = codec_mod.decode(stream, model, frame_rate=seq.frame_rate)
        points.append(
            RDPoint(
                codec=cname,
                L=L,
                b=b,
                CR=compression_ratio(seq.F, seq.J, stream),
                D=distortion(seq, recon),
            )
        )
    return points


def gen_synthetic(
    J: int,
    F: int,
    rank: int = 8,
    seed: int = 0,
    frame_rate: float = 120.0,
    amplitude: float = 10.0,
    translation: float = 5.0,
    max_hz: float = 1.0,
    harmonics: int = 4,
) -> MotionSequence:
    """Deterministic smooth synthetic sequence with known spatial rank.

    Per dimension, `rank` latent curves (sums of low-frequency sinusoids)
    are mixed through a random J-by-rank matrix; a shared smooth rigid
    translation is added to every joint.  Rows are smooth in time and
    columns live in a low-dimensional subspace, mimicking mocap structure.
    """
    if not 1 <= rank <= J:
        raise DataError(f"rank {rank} outside [1, {J}]")
    rng = np.random.default_rng(seed)
    t = np.arange(F) / frame_rate
    data = np.empty((3, J, F))
    for di in range(3):
        freqs = rng.uniform(0.05, max_hz, size=(rank, harmonics))
        phases = rng.uniform(0, 2 * np.pi, size=(rank, harmonics))
        amps = rng.uniform(0.3, 1.0, size=(rank, harmonics)) / harmonics
        latents = np.einsum(
            "kh,kht->kt",
            amps,
            np.sin(2 * np.pi * freqs[:, :, None] * t[None, None, :] + phases[:, :, None]),
        )
        mixing = rng.normal(size=(J, rank)) / np.sqrt(rank)
        shift_f = rng.uniform(0.05, max_hz / 2)
        shift = translation * np.sin(2 * np.pi * shift_f * t + rng.uniform(0, 2 * np.pi))
        data[di] = amplitude * (mixing @ latents) + shift[None, :]
    return MotionSequence(data, frame_rate=frame_rate)


def rd_csv_rows(points) -> list[str]:
    rows = ["codec,L,b,CR,D"]
    rows += [f"{p.codec},{p.L},{p.b},{p.CR:.6g},{p.D:.6g}" for p in points]
    return rows


def sparsity_csv_rows(points) -> list[str]:
    rows = ["transform,fraction,D"]
    rows += [f"{p.transform},{p.fraction:g},{p.D:.6g}" for p in points]
    return rows


def convergence_csv_rows(model: TransformModel) -> list[str]:
    rows = ["dim,iteration,objective"]
    for d in DIMS:
        for it, obj in enumerate(model.meta.objective_trace.get(d, []), start=1):
            rows.append(f"{d},{it},{obj:.10g}")
    return rows
