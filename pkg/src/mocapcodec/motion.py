"""Motion sequence data model, file I/O and clip partitioning.

A motion sequence is three J-by-F coordinate matrices (one per spatial
dimension), where J is the marker count and F the frame count.  Two file
formats are supported:

* CSV: optional first line ``# J=<int> fps=<real>``, then one frame per
  row with 3J comma-separated floats in marker-major order
  (x1,y1,z1,x2,y2,z2,...).
* raw-f32: 16-byte header = magic ``MCP1``, J (u32 LE), F (u32 LE),
  fps (f32 LE), followed by F frames of 3J little-endian f32 values in
  marker-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    FormatMismatchError,
    InvalidDimensionError,
    NonFiniteValueError,
    ShapeMismatchError,
)

DIMS = ("x", "y", "z")
RAW_MAGIC = b"MCP1"


@dataclass(frozen=True)
class MotionSequence:
    """Immutable container for a 3D marker sequence.

    ``data`` has shape (3, J, F); ``data[d]`` is the J-by-F coordinate
    matrix of dimension d, whose column i is the frame vector at time i.
    """

    data: np.ndarray
    frame_rate: float = 120.0

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise ShapeMismatchError(f"expected (3, J, F) array, got {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DataError(f"J and F must be positive, got {arr.shape[1:]}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValueError("motion data contains NaN or Inf")
        if self.frame_rate <= 0:
            raise DataError(f"frame_rate must be positive, got {self.frame_rate}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def J(self) -> int:
        return self.data.shape[1]

    @property
    def F(self) -> int:
        return self.data.shape[2]

    def dimension_matrix(self, d: str) -> np.ndarray:
        """Return the J-by-F matrix of dimension d in {x, y, z}."""
        if d not in DIMS:
            raise InvalidDimensionError(f"unknown dimension {d!r}, expected one of {DIMS}")
        return self.data[DIMS.index(d)]

    def frames(self) -> np.ndarray:
        """Frame-major view of shape (F, J, 3)."""
        return self.data.transpose(2, 1, 0)


@dataclass(frozen=True)
class Clip:
    """A block of consecutive frames cut from a parent sequence."""

    start_frame: int
    data: np.ndarray  # (3, J, L)

    @property
    def length(self) -> int:
        return self.data.shape[2]


def partition_clips(seq: MotionSequence, L: int) -> list[Clip]:
    """Split a sequence into non-overlapping clips of length L.

    The trailing clip is shorter when F is not a multiple of L;
    concatenating the clips in order reproduces the sequence exactly.
    """
    if L < 1:
        raise DataError(f"clip length must be >= 1, got {L}")
    clips = []
    for start in range(0, seq.F, L):
        clips.append(Clip(start_frame=start, data=seq.data[:, :, start : start + L]))
    return clips


def _frames_to_data(frames: np.ndarray) -> np.ndarray:
    """(F, 3J) marker-major rows -> (3, J, F)."""
    F, width = frames.shape
    J = width // 3
    return frames.reshape(F, J, 3).transpose(2, 1, 0)


def load_motion(path, format: str = "csv", J: int | None = None) -> MotionSequence:
    """Load a motion file; J and F are inferred from the file.

    For headerless CSV files the marker count must be passed explicitly.
    """
    if format == "csv":
        return _load_csv(path, J)
    if format == "raw-f32":
        return _load_raw(path)
    raise DataError(f"unknown motion format {format!r}")


def save_motion(seq: MotionSequence, path, format: str = "csv") -> None:
    if format == "csv":
        _save_csv(seq, path)
    elif format == "raw-f32":
        _save_raw(seq, path)
    else:
        raise DataError(f"unknown motion format {format!r}")


def guess_format(path) -> str:
    """Pick a format from the file extension (.csv vs anything else)."""
    return "csv" if str(path).lower().endswith(".csv") else "raw-f32"


def _load_csv(path, J: int | None) -> MotionSequence:
    fps = 120.0
    header_J = None
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if lineno == 1:
                    for token in line[1:].replace(",", " ").split():
                        if token.startswith("J="):
                            header_J = int(token[2:])
                        elif token.startswith("fps="):
                            fps = float(token[4:])
                continue
            try:
                values = np.array([float(v) for v in line.split(",")], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparsable value ({exc})") from exc
            if not np.all(np.isfinite(values)):
                raise NonFiniteValueError(f"{path}:{lineno}: non-finite value in row")
            rows.append((lineno, values))
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = rows[0][1].size
    for lineno, values in rows:
        if values.size != width:
            raise DataError(
                f"{path}:{lineno}: row has {values.size} values, expected {width}"
            )
    eff_J = header_J if header_J is not None else J
    if eff_J is None:
        if width % 3 != 0:
            raise DataError(f"{path}: row width {width} is not a multiple of 3")
        eff_J = width // 3
    if width != 3 * eff_J:
        raise DataError(f"{path}: row width {width} does not match J={eff_J}")
    frames = np.stack([v for _, v in rows])
    return MotionSequence(_frames_to_data(frames), frame_rate=fps)


def _save_csv(seq: MotionSequence, path) -> None:
    flat = seq.frames().reshape(seq.F, 3 * seq.J)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# J={seq.J} fps={seq.frame_rate:g}\n")
        for row in flat:
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")


def _load_raw(path) -> MotionSequence:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise FormatMismatchError(f"{path}: truncated raw-f32 header")
        magic, J, F, fps = struct.unpack("<4sIIf", header)
        if magic != RAW_MAGIC:
            raise FormatMismatchError(f"{path}: bad magic {magic!r}")
        body = fh.read()
    expected = 4 * 3 * J * F
    if len(body) != expected:
        raise DataError(f"{path}: payload is {len(body)} bytes, expected {expected}")
    frames = np.frombuffer(body, dtype="<f4").reshape(F, 3 * J).astype(np.float64)
    if not np.all(np.isfinite(frames)):
        raise NonFiniteValueError(f"{path}: non-finite value in payload")
    return MotionSequence(_frames_to_data(frames), frame_rate=float(fps))


def _save_raw(seq: MotionSequence, path) -> None:
    flat = seq.frames().reshape(seq.F, 3 * seq.J).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIf", RAW_MAGIC, seq.J, seq.F, seq.frame_rate))
        fh.write(flat.tobytes())
