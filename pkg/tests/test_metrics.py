import numpy as np
import pytest

from mocapcodec.codec import encode_clip_based
from mocapcodec.errors import DataError, InvalidSweepError, ShapeMismatchError
from mocapcodec.metrics import (
    compression_ratio,
    convergence_csv_rows,
    distortion,
    gen_synthetic,
    per_joint_distortion,
    rd_csv_rows,
    rd_sweep,
    sparsity_csv_rows,
    sparsity_distortion_curve,
)
from mocapcodec.motion import MotionSequence


class TestDistortion:
    def test_hand_computed_value(self):
        orig = MotionSequence(np.zeros((3, 2, 2)))
        shifted = np.zeros((3, 2, 2))
        shifted[0] = 3.0  # x offset 3
        shifted[1] = 4.0  # y offset 4 -> Euclidean error 5 everywhere
        assert distortion(orig, MotionSequence(shifted)) == pytest.approx(5.0)

    def test_zero_for_identical(self, seq13):
        assert distortion(seq13, seq13) == 0.0

    def test_per_joint_mean_equals_total(self, seq13, model13):
        from mocapcodec.codec import decode_clip_based

        recon = decode_clip_based(encode_clip_based(seq13, model13, 16, 6), model13)
        pj = per_joint_distortion(seq13, recon)
        assert pj.shape == (13,)
        assert np.mean(pj) == pytest.approx(distortion(seq13, recon))

    def test_shape_mismatch(self, seq13, seq31):
        with pytest.raises(ShapeMismatchError):
            distortion(seq13, seq31)


class TestCompressionRatio:
    def test_formula(self, seq13, model13):
        stream = encode_clip_based(seq13, model13, 16, 8)
        nbytes = len(stream.to_bytes())
        expected = (seq13.F * seq13.J * 96) / (8 * nbytes)
        assert compression_ratio(seq13.F, seq13.J, stream) == pytest.approx(expected)


class TestSynthetic:
    def test_shape_and_determinism(self):
        a = gen_synthetic(10, 50, rank=3, seed=42)
        b = gen_synthetic(10, 50, rank=3, seed=42)
        assert a.data.shape == (3, 10, 50)
        assert np.array_equal(a.data, b.data)
        c = gen_synthetic(10, 50, rank=3, seed=43)
        assert not np.array_equal(a.data, c.data)

    def test_low_spatial_rank(self):
        # joints plus the shared translation span at most rank+1 dimensions
        seq = gen_synthetic(20, 400, rank=4, seed=1)
        for di in range(3):
            s = np.linalg.svd(seq.data[di], compute_uv=False)
            assert s[5] / s[0] < 1e-10

    def test_invalid_rank(self):
        with pytest.raises(DataError):
            gen_synthetic(5, 10, rank=6)


class TestSparsityCurve:
    def test_distortion_decreases_with_fraction(self, seq13, model13):
        pts = sparsity_distortion_curve(seq13, model13, [0.2, 0.5, 1.0])
        assert pts[0].D >= pts[1].D >= pts[2].D
        assert pts[2].D < 1e-10  # keeping everything is lossless
        assert all(p.transform == "lsdt" for p in pts)

    def test_baseline_transforms_run(self, seq13):
        for name in ("dct", "dwt"):
            pts = sparsity_distortion_curve(seq13, name, [0.25, 1.0])
            # at f=1 the DCT keeps all J coefficients and is lossless; the
            # padded DWT keeps J of its 16 coefficients, so only monotone
            assert pts[1].D <= pts[0].D
            assert pts[0].transform == name
        dct_pts = sparsity_distortion_curve(seq13, "dct", [1.0])
        assert dct_pts[0].D < 1e-9

    def test_lsdt_requires_model(self, seq13):
        with pytest.raises(DataError):
            sparsity_distortion_curve(seq13, "lsdt", [0.5])

    def test_fraction_validated(self, seq13, model13):
        with pytest.raises(DataError):
            sparsity_distortion_curve(seq13, model13, [0.0])

    def test_unknown_transform(self, seq13):
        with pytest.raises(DataError):
            sparsity_distortion_curve(seq13, "pca", [0.5])


class TestRdSweep:
    def test_both_codecs_grid(self, seq13, model13):
        pts = rd_sweep(seq13, model13, "both", [6, 10], L_values=[16, 32])
        frame_pts = [p for p in pts if p.codec == "frame"]
        clip_pts = [p for p in pts if p.codec == "clip"]
        assert len(frame_pts) == 2 and len(clip_pts) == 4
        assert all(p.L == 0 for p in frame_pts)
        for grp in (frame_pts, clip_pts):
            by_b = sorted(grp, key=lambda p: (p.L, p.b))
            assert all(p.CR > 0 and p.D >= 0 for p in by_b)

    def test_empty_grids_rejected(self, seq13, model13):
        with pytest.raises(InvalidSweepError):
            rd_sweep(seq13, model13, "frame", [])
        with pytest.raises(InvalidSweepError):
            rd_sweep(seq13, model13, "clip", [8], L_values=[])
        with pytest.raises(DataError):
            rd_sweep(seq13, model13, "neither", [8])


class TestCsvRows:
    def test_headers(self, seq13, model13, model31):
        pts = rd_sweep(seq13, model13, "frame", [8])
        rows = rd_csv_rows(pts)
        assert rows[0] == "codec,L,b,CR,D"
        assert rows[1].startswith("frame,0,8,")
        spts = sparsity_distortion_curve(seq13, model13, [0.5])
        assert sparsity_csv_rows(spts)[0] == "transform,fraction,D"
        conv = convergence_csv_rows(model31)
        assert conv[0] == "dim,iteration,objective"
        assert conv[1].startswith("x,1,")
