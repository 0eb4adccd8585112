"""Uniform scalar quantization with an implicit dead zone.

Coefficients are mapped to signed integer indices q = round(c / step)
with round-half-away-from-zero; indices that round to zero are dropped,
which realizes a hard threshold at step/2.  The step derives from a
per-segment scale max_abs so that indices always fit the signed b-bit
range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

MIN_BITS = 2
MAX_BITS = 16


def f32_upper(value: float) -> float:
    """Round a scale up to the nearest float32 so the stored (f32) scale
    still bounds every coefficient it was computed from."""
    v32 = np.float32(value)
    if float(v32) < value:
        v32 = np.nextafter(v32, np.float32(np.inf))
    return float(v32)


@dataclass(frozen=True)
class QuantizerSpec:
    """Bit depth plus per-segment scale of a uniform quantizer."""

    bits: int
    max_abs: float

    def __post_init__(self):
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise DataError(f"bits={self.bits} outside [{MIN_BITS}, {MAX_BITS}]")
        if self.max_abs < 0 or not np.isfinite(self.max_abs):
            raise DataError(f"max_abs must be finite and >= 0, got {self.max_abs}")

    @property
    def levels(self) -> int:
        return (1 << (self.bits - 1)) - 1

    @property
    def step(self) -> float:
        return self.max_abs / self.levels


@dataclass(frozen=True)
class SparseVectorCode:
    """Quantized nonzero entries of one coefficient vector."""

    count: int
    locations: np.ndarray  # strictly increasing int indices
    values: np.ndarray  # nonzero signed integers

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.int64)
        if locs.shape != vals.shape or locs.shape != (self.count,):
            raise DataError("locations/values length must equal count")
        if self.count and (np.any(np.diff(locs) <= 0) or locs[0] < 0):
            raise DataError("locations must be strictly increasing and nonnegative")
        if np.any(vals == 0):
            raise DataError("coded values must be nonzero")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "values", vals)


def quantize_matrix(coeffs: np.ndarray, spec: QuantizerSpec) -> np.ndarray:
    """Integer indices for an array of coefficients (vector or matrix)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if spec.max_abs == 0.0:
        if np.any(coeffs != 0.0):
            raise DataError("max_abs=0 but coefficients are nonzero")
        return np.zeros(coeffs.shape, dtype=np.int64)
    step = spec.step
    peak = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if peak > spec.max_abs + step / 2:
        raise DataError(
            f"coefficient magnitude {peak:g} exceeds quantizer scale {spec.max_abs:g}"
        )
    return (np.floor(np.abs(coeffs) / step + 0.5) * np.sign(coeffs)).astype(np.int64)


def quantize(coeffs: np.ndarray, spec: QuantizerSpec) -> SparseVectorCode:
    """Quantize one coefficient vector, dropping zero indices."""
    q = quantize_matrix(np.asarray(coeffs, dtype=np.float64).ravel(), spec)
    locs = np.flatnonzero(q)
    return SparseVectorCode(count=len(locs), locations=locs, values=q[locs])


def dequantize(code: SparseVectorCode, spec: QuantizerSpec, n: int) -> np.ndarray:
    """Reconstruct a length-n coefficient vector from a sparse code."""
    if code.count and code.locations[-1] >= n:
        raise DataError(f"location {code.locations[-1]} >= vector length {n}")
    out = np.zeros(n)
    if code.count:
        out[code.locations] = code.values * spec.step
    return out
