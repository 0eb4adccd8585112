"""Learning the orthogonal spatial decorrelation bases.

The learning problem: given N training frame vectors per coordinate
dimension, find an orthogonal J-by-J matrix B minimizing
sum_i ||B m_i - e_i||_2^2 subject to ||e_i||_0 <= P.  Solved by
alternating two exact subproblem solutions:

* sparse step: with B fixed, e_i keeps the P largest-magnitude entries
  of B m_i;
* orthogonal step: with E fixed, B = V U^T from the SVD M E^T = U S V^T
  (closed-form orthogonal Procrustes solution).

Each half step solves its subproblem exactly, so the objective is
non-increasing throughout.
"""

from __future__ import annotations

import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    FormatMismatchError,
    InvariantViolationError,
    NonFiniteValueError,
)
from .motion import DIMS, MotionSequence
from .transforms import dct_matrix, haar_matrix, truncate_columns

MODEL_MAGIC = b"LSDT"
MODEL_VERSION = 1
INIT_CODES = {"dct": 0, "haar": 1, "identity": 2}
INIT_NAMES = {v: k for k, v in INIT_CODES.items()}

DEFAULT_P = 8
DEFAULT_K = 500
DEFAULT_TOL = 1e-8
STOP_WINDOW = 10


@dataclass(frozen=True)
class TrainMeta:
    P: int
    K: int
    N: int
    init: str
    converged_tol: float
    objective_trace: dict = field(default_factory=dict)
    half_step_trace: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TransformModel:
    """Three learned J-by-J orthogonal bases plus training metadata."""

    J: int
    bases: dict  # dim name -> (J, J) orthogonal ndarray
    meta: TrainMeta

    def __post_init__(self):
        for d in DIMS:
            B = self.bases[d]
            if B.shape != (self.J, self.J):
                raise DataError(f"basis {d} has shape {B.shape}, expected square J={self.J}")
            dev = np.max(np.abs(B @ B.T - np.eye(self.J)))
            if dev > 1e-9:
                raise InvariantViolationError(
                    f"basis {d} is not orthogonal (max deviation {dev:.3e})"
                )


@dataclass(frozen=True)
class TrainingBatch:
    """Per-dimension J-by-N matrices of training frame vectors."""

    M: np.ndarray  # (3, J, N)
    source: str = ""

    def __post_init__(self):
        arr = np.asarray(self.M, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 3 or arr.shape[2] < 1:
            raise DataError(f"training batch must be (3, J, N), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValueError("training data contains NaN or Inf")
        object.__setattr__(self, "M", arr)

    @property
    def J(self) -> int:
        return self.M.shape[1]

    @property
    def N(self) -> int:
        return self.M.shape[2]


def batch_from_sequences(seqs, residuals: bool = False, source: str = "") -> TrainingBatch:
    """Stack frames of several sequences into one training batch.

    With residuals=True the batch holds frame differences (first frame of
    each sequence kept raw), for experimenting with residual-domain
    training; the default trains on raw frames.
    """
    mats = []
    for seq in seqs:
        M = seq.data
        if residuals:
            M = np.concatenate([M[:, :, :1], np.diff(M, axis=2)], axis=2)
        mats.append(M)
    Js = {m.shape[1] for m in mats}
    if len(Js) != 1:
        raise DataError(f"training sequences disagree on J: {sorted(Js)}")
    return TrainingBatch(np.concatenate(mats, axis=2), source=source)


def sparse_step(B: np.ndarray, M: np.ndarray, P: int) -> np.ndarray:
    """Exact minimizer in E for fixed B: column-wise top-P truncation of B M."""
    J = M.shape[0]
    if not 1 <= P <= J:
        raise DataError(f"P={P} outside [1, {J}]")
    return truncate_columns(B @ M, P)


def procrustes_step(M: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Orthogonal B minimizing ||B M - E||_F^2, via SVD of M E^T.

    Left singular vector signs are fixed (largest-magnitude entry made
    nonnegative, with the paired flip applied to V) so intermediate
    factors are deterministic; B = V U^T itself is invariant to the flips.
    """
    W = M @ E.T
    if not np.all(np.isfinite(W)):
        raise NonFiniteValueError("non-finite input to SVD")
    U, _, Vt = np.linalg.svd(W)
    flip = np.sign(U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])])
    flip[flip == 0] = 1.0
    U = U * flip[None, :]
    Vt = Vt * flip[:, None]
    return Vt.T @ U.T


def objective(B: np.ndarray, M: np.ndarray, E: np.ndarray) -> float:
    """||B M - E||_F^2."""
    diff = B @ M - E
    return float(np.sum(diff * diff))


def _initial_basis(J: int, init: str) -> np.ndarray:
    if init == "dct":
        return dct_matrix(J).matrix
    if init == "identity":
        return np.eye(J)
    if init == "haar":
        # For J not divisible by 2^levels: block-diagonal Haar on the largest
        # power-of-two leading block, identity on the remainder.
        levels = 3
        while levels > 0 and J % (1 << levels) != 0:
            levels -= 1
        if levels > 0:
            return haar_matrix(J, levels)
        block = 1 << max((J).bit_length() - 1, 0)
        lv = min(3, max(block.bit_length() - 1, 1))
        B = np.eye(J)
        B[:block, :block] = haar_matrix(block, lv)
        return B
    raise DataError(f"unknown init {init!r}, expected one of {sorted(INIT_CODES)}")


def _train_one(M: np.ndarray, P: int, K: int, tol: float, init: str):
    B = _initial_basis(M.shape[0], init)
    trace = []
    half_trace = []
    E = None
    for _ in range(K):
        E = sparse_step(B, M, P)
        half_trace.append(objective(B, M, E))
        B = procrustes_step(M, E)
        obj = objective(B, M, E)
        half_trace.append(obj)
        trace.append(obj)
        if len(trace) > STOP_WINDOW:
            prev = trace[-STOP_WINDOW - 1]
            if prev - trace[-1] <= tol * max(prev, np.finfo(float).tiny):
                break
    return B, trace, half_trace


def train_lsdt(
    batch: TrainingBatch,
    P: int = DEFAULT_P,
    K: int = DEFAULT_K,
    tol: float = DEFAULT_TOL,
    init: str = "dct",
    threads: int = 1,
) -> TransformModel:
    """Run the alternating minimization independently per coordinate dimension."""
    if not 1 <= P <= batch.J:
        raise DataError(f"P={P} outside [1, {batch.J}]")
    if K < 1:
        raise DataError(f"K must be >= 1, got {K}")
    if tol < 0:
        raise DataError(f"tol must be >= 0, got {tol}")
    if init not in INIT_CODES:
        raise DataError(f"unknown init {init!r}")

    def run(d):
        return _train_one(batch.M[DIMS.index(d)], P, K, tol, init)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=min(threads, 3)) as pool:
            results = dict(zip(DIMS, pool.map(run, DIMS)))
    else:
        results = {d: run(d) for d in DIMS}

    meta = TrainMeta(
        P=P,
        K=K,
        N=batch.N,
        init=init,
        converged_tol=tol,
        objective_trace={d: results[d][1] for d in DIMS},
        half_step_trace={d: results[d][2] for d in DIMS},
    )
    return TransformModel(J=batch.J, bases={d: results[d][0] for d in DIMS}, meta=meta)


def save_model(model: TransformModel, path) -> None:
    """Write the model file: LSDT magic, metadata, three f64 matrices, CRC32."""
    body = struct.pack(
        "<4sHHHIQB",
        MODEL_MAGIC,
        MODEL_VERSION,
        model.J,
        model.meta.P,
        model.meta.K,
        model.meta.N,
        INIT_CODES[model.meta.init],
    )
    for d in DIMS:
        body += np.ascontiguousarray(model.bases[d], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body)))


def load_model(path) -> TransformModel:
    """Read a model file, re-validating checksum and orthogonality."""
    with open(path, "rb") as fh:
        raw = fh.read()
    head_size = struct.calcsize("<4sHHHIQB")
    if len(raw) < head_size + 4:
        raise FormatMismatchError(f"{path}: file too short for a model")
    magic, version, J, P, K, N, init_code = struct.unpack_from("<4sHHHIQB", raw)
    if magic != MODEL_MAGIC:
        raise FormatMismatchError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise FormatMismatchError(f"{path}: unsupported version {version}")
    body, crc_bytes = raw[:-4], raw[-4:]
    if struct.unpack("<I", crc_bytes)[0] != zlib.crc32(body):
        raise InvariantViolationError(f"{path}: checksum mismatch")
    expected = head_size + 3 * J * J * 8
    if len(body) != expected:
        raise FormatMismatchError(f"{path}: body is {len(body)} bytes, expected {expected}")
    bases = {}
    offset = head_size
    for d in DIMS:
        mat = np.frombuffer(body, dtype="<f8", count=J * J, offset=offset).reshape(J, J)
        bases[d] = mat.astype(np.float64)
        offset += J * J * 8
    if init_code not in INIT_NAMES:
        raise FormatMismatchError(f"{path}: unknown init code {init_code}")
    meta = TrainMeta(P=P, K=K, N=N, init=INIT_NAMES[init_code], converged_tol=DEFAULT_TOL)
    return TransformModel(J=J, bases=bases, meta=meta)
