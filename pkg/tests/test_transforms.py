import numpy as np
import pytest

from mocapcodec.errors import DataError, InvariantViolationError, ShapeMismatchError
from mocapcodec.transforms import (
    OrthonormalBasis,
    apply_forward,
    apply_inverse,
    dct_matrix,
    haar_dwt_forward,
    haar_dwt_inverse,
    haar_matrix,
    haar_padded_size,
    truncate,
    truncate_columns,
)


class TestOrthonormalBasis:
    def test_accepts_rotation(self):
        th = 0.3
        m = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        basis = OrthonormalBasis(m)
        assert basis.size == 2

    def test_rejects_non_orthogonal(self):
        with pytest.raises(InvariantViolationError):
            OrthonormalBasis(np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ShapeMismatchError):
            OrthonormalBasis(np.zeros((2, 3)))


class TestDct:
    def test_orthogonal(self):
        for L in (1, 2, 7, 31, 240):
            M = dct_matrix(L).matrix
            assert np.max(np.abs(M @ M.T - np.eye(L))) < 1e-12

    def test_entries_match_definition(self):
        L = 5
        M = dct_matrix(L).matrix
        for n in range(L):
            for k in range(L):
                alpha = np.sqrt((1.0 if k == 0 else 2.0) / L)
                assert M[n, k] == pytest.approx(
                    alpha * np.cos(np.pi * (2 * n + 1) * k / (2 * L))
                )

    def test_constant_signal_concentrates(self):
        L = 16
        coeffs = np.ones(L) @ dct_matrix(L).matrix
        assert coeffs[0] == pytest.approx(np.sqrt(L))
        assert np.max(np.abs(coeffs[1:])) < 1e-12

    def test_invalid_size(self):
        with pytest.raises(DataError):
            dct_matrix(0)


class TestHaar:
    def test_orthogonal(self):
        H = haar_matrix(16, 3)
        assert np.max(np.abs(H @ H.T - np.eye(16))) < 1e-12

    def test_single_level_pairs(self):
        H = haar_matrix(4, 1)
        v = np.array([1.0, 3.0, 2.0, 6.0])
        w = H @ v
        s = np.sqrt(0.5)
        assert np.allclose(w, [s * 4, s * 8, s * -2, s * -4])

    def test_size_constraint(self):
        with pytest.raises(DataError):
            haar_matrix(6, 2)

    def test_padded_size(self):
        assert haar_padded_size(31, 3) == 32
        assert haar_padded_size(32, 3) == 32

    def test_dwt_round_trip_with_padding(self):
        rng = np.random.default_rng(0)
        for n in (5, 8, 31):
            v = rng.normal(size=n)
            w = haar_dwt_forward(v, levels=3)
            assert w.shape[0] == haar_padded_size(n, 3)
            assert np.allclose(haar_dwt_inverse(w, 3, n), v, atol=1e-12)

    def test_dwt_preserves_energy(self):
        v = np.random.default_rng(1).normal(size=24)
        w = haar_dwt_forward(v, levels=3)
        assert np.sum(w * w) == pytest.approx(np.sum(v * v))


class TestTruncate:
    def test_keeps_largest(self):
        out = truncate(np.array([0.5, -3.0, 1.0, 2.0]), 2)
        assert np.array_equal(out, [0.0, -3.0, 0.0, 2.0])

    def test_tie_breaks_to_lower_index(self):
        out = truncate(np.array([1.0, -1.0, 1.0]), 2)
        assert np.array_equal(out, [1.0, -1.0, 0.0])

    def test_P_zero_and_full(self):
        g = np.array([1.0, 2.0])
        assert np.array_equal(truncate(g, 0), [0.0, 0.0])
        assert np.array_equal(truncate(g, 2), g)

    def test_out_of_range_P(self):
        with pytest.raises(DataError):
            truncate(np.zeros(3), 4)

    def test_columns_matches_vector_version(self):
        rng = np.random.default_rng(2)
        G = rng.normal(size=(9, 40))
        out = truncate_columns(G, 3)
        for j in range(G.shape[1]):
            assert np.array_equal(out[:, j], truncate(G[:, j], 3))


class TestApply:
    def test_forward_inverse_identity(self):
        rng = np.random.default_rng(3)
        B = dct_matrix(6)
        X = rng.normal(size=(6, 10))
        assert np.allclose(apply_inverse(B, apply_forward(B, X)), X, atol=1e-12)

    def test_shape_checked(self):
        with pytest.raises(ShapeMismatchError):
            apply_forward(dct_matrix(4), np.zeros((5, 2)))
