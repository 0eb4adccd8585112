"""Orthonormal transforms and the magnitude-truncation operator.

Provides the orthonormal DCT-II matrix (used as temporal transform in the
clip codec and as a spatial baseline), an orthonormal multi-level Haar
analysis, and forward/inverse application of any orthogonal basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvariantViolationError, ShapeMismatchError

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class OrthonormalBasis:
    """An n-by-n real matrix validated to be orthogonal at construction."""

    matrix: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeMismatchError(f"basis must be square, got {m.shape}")
        dev = np.max(np.abs(m @ m.T - np.eye(m.shape[0])))
        if dev > ORTHO_TOL:
            raise InvariantViolationError(
                f"basis is not orthogonal (max deviation {dev:.3e})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def dct_matrix(L: int) -> OrthonormalBasis:
    """Orthonormal DCT-II basis of size L.

    Entry [n, k] = alpha_k * cos(pi*(2n+1)*k / (2L)) with alpha_0 = sqrt(1/L)
    and alpha_k = sqrt(2/L) otherwise, so a row vector times the matrix
    yields the DCT coefficients of that row.
    """
    if L < 1:
        raise DataError(f"DCT size must be >= 1, got {L}")
    n = np.arange(L)[:, None]
    k = np.arange(L)[None, :]
    mat = np.cos(np.pi * (2 * n + 1) * k / (2 * L))
    alpha = np.full(L, np.sqrt(2.0 / L))
    alpha[0] = np.sqrt(1.0 / L)
    return OrthonormalBasis(mat * alpha[None, :], kind="dct")


def haar_matrix(n: int, levels: int) -> np.ndarray:
    """Orthonormal Haar analysis matrix of size n (n divisible by 2^levels).

    Output coefficient order: final approximation block first, then detail
    blocks from coarsest to finest.
    """
    if levels < 1:
        raise DataError(f"levels must be >= 1, got {levels}")
    if n % (1 << levels) != 0:
        raise DataError(f"size {n} is not a multiple of 2^{levels}")
    H = np.eye(n)
    block = n
    s = np.sqrt(0.5)
    for _ in range(levels):
        step = np.eye(n)
        half = block // 2
        step[:block, :block] = 0.0
        idx = np.arange(half)
        step[idx, 2 * idx] = s
        step[idx, 2 * idx + 1] = s
        step[half + idx, 2 * idx] = s
        step[half + idx, 2 * idx + 1] = -s
        H = step @ H
        block = half
    return H


def haar_padded_size(length: int, levels: int) -> int:
    unit = 1 << levels
    return ((length + unit - 1) // unit) * unit


def haar_dwt_forward(v: np.ndarray, levels: int = 3) -> np.ndarray:
    """Orthonormal Haar analysis of v, zero-padded to a multiple of 2^levels."""
    v = np.asarray(v, dtype=np.float64)
    n_pad = haar_padded_size(v.shape[0], levels)
    padded = np.zeros(n_pad)
    padded[: v.shape[0]] = v
    return haar_matrix(n_pad, levels) @ padded


def haar_dwt_inverse(w: np.ndarray, levels: int, length: int) -> np.ndarray:
    """Inverse of haar_dwt_forward, truncated back to the original length."""
    w = np.asarray(w, dtype=np.float64)
    return (haar_matrix(w.shape[0], levels).T @ w)[:length]


def truncate(g: np.ndarray, P: int) -> np.ndarray:
    """Keep the P largest-magnitude entries of g in place, zero the rest.

    Ties at the cut keep the lower index, which makes the operator
    deterministic.  This is the exact l2 projection onto {e : ||e||_0 <= P}.
    """
    g = np.asarray(g, dtype=np.float64)
    if not 0 <= P <= g.shape[0]:
        raise DataError(f"P={P} outside [0, {g.shape[0]}]")
    out = np.zeros_like(g)
    keep = np.argsort(-np.abs(g), kind="stable")[:P]
    out[keep] = g[keep]
    return out


def truncate_columns(G: np.ndarray, P: int) -> np.ndarray:
    """Column-wise truncate for a matrix of stacked vectors."""
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    if not 0 <= P <= n:
        raise DataError(f"P={P} outside [0, {n}]")
    if P == n:
        return G.copy()
    order = np.argsort(-np.abs(G), axis=0, kind="stable")
    out = np.zeros_like(G)
    cols = np.arange(G.shape[1])[None, :]
    keep = order[:P]
    out[keep, cols] = G[keep, cols]
    return out


def apply_forward(B: OrthonormalBasis, X: np.ndarray) -> np.ndarray:
    """B.matrix @ X (forward transform of column vectors)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != B.size:
        raise ShapeMismatchError(f"basis size {B.size} vs operand rows {X.shape[0]}")
    return B.matrix @ X


def apply_inverse(B: OrthonormalBasis, Y: np.ndarray) -> np.ndarray:
    """B.matrix.T @ Y, the exact inverse of apply_forward."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape[0] != B.size:
        raise ShapeMismatchError(f"basis size {B.size} vs operand rows {Y.shape[0]}")
    return B.matrix.T @ Y
