import numpy as np
import pytest

from mocapcodec.cli import main
from mocapcodec.motion import load_motion


@pytest.fixture()
def workspace(tmp_path):
    """Generated motion file plus a trained model for CLI pipelines."""
    motion = tmp_path / "motion.csv"
    model = tmp_path / "model.lsdt"
    assert main(["gen", "--J", "8", "--F", "120", "--rank", "3", "--seed", "2", "--out", str(motion)]) == 0
    assert main(["train", "--in", str(motion), "--out", str(model), "--P", "3", "--K", "15"]) == 0
    return tmp_path, motion, model


class TestGen:
    def test_writes_csv_and_raw(self, tmp_path):
        for name in ("a.csv", "a.raw"):
            out = tmp_path / name
            assert main(["gen", "--J", "5", "--F", "10", "--rank", "2", "--out", str(out)]) == 0
            seq = load_motion(out, format="csv" if name.endswith("csv") else "raw-f32")
            assert seq.J == 5 and seq.F == 10

    def test_bad_rank(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "--J", "5", "--F", "10", "--rank", "9", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2


class TestTrain:
    def test_multiple_inputs_and_convergence_csv(self, tmp_path, capsys):
        m1, m2 = tmp_path / "m1.csv", tmp_path / "m2.csv"
        main(["gen", "--J", "6", "--F", "60", "--rank", "2", "--seed", "3", "--out", str(m1)])
        main(["gen", "--J", "6", "--F", "40", "--rank", "2", "--seed", "4", "--out", str(m2)])
        conv = tmp_path / "conv.csv"
        rc = main(
            ["train", "--in", str(m1), str(m2), "--out", str(tmp_path / "m.lsdt"),
             "--P", "2", "--K", "10", "--init", "identity", "--convergence-csv", str(conv)]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "final objective" in out and "N=100" in out
        lines = conv.read_text().splitlines()
        assert lines[0].startswith("# mocapcodec")
        assert lines[1] == "dim,iteration,objective"

    def test_convergence_plot(self, workspace):
        tmp_path, motion, _ = workspace
        png = tmp_path / "conv.png"
        rc = main(["train", "--in", str(motion), "--out", str(tmp_path / "m2.lsdt"),
                   "--P", "2", "--K", "5", "--plot", str(png)])
        assert rc == 0
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_bad_P(self, workspace):
        tmp_path, motion, _ = workspace
        with pytest.raises(SystemExit) as exc:
            main(["train", "--in", str(motion), "--out", str(tmp_path / "x.lsdt"), "--P", "0"])
        assert exc.value.code == 2


class TestEncodeDecodeEval:
    def test_full_pipeline(self, workspace, capsys):
        tmp_path, motion, model = workspace
        stream = tmp_path / "m.mccs"
        recon = tmp_path / "recon.csv"
        rc = main(["encode", "--in", str(motion), "--model", str(model),
                   "--out", str(stream), "--codec", "clip", "--L", "30", "--b", "10"])
        assert rc == 0
        assert "CR=" in capsys.readouterr().out
        assert main(["decode", "--in", str(stream), "--model", str(model), "--out", str(recon)]) == 0
        per_joint = tmp_path / "pj.csv"
        assert main(["eval", str(motion), str(recon), "--per-joint", str(per_joint)]) == 0
        out = capsys.readouterr().out
        D = float(out.split("D=")[1].split()[0])
        assert D < 0.1
        assert per_joint.read_text().splitlines()[1] == "joint,D"

    def test_frame_codec_streaming_mode(self, workspace):
        tmp_path, motion, model = workspace
        stream = tmp_path / "f.mccs"
        rc = main(["encode", "--in", str(motion), "--model", str(model), "--out", str(stream),
                   "--codec", "frame", "--b", "8", "--mode", "streaming"])
        assert rc == 0
        assert main(["decode", "--in", str(stream), "--model", str(model),
                     "--out", str(tmp_path / "r.csv")]) == 0

    def test_corrupt_stream_exit_code(self, workspace):
        tmp_path, motion, model = workspace
        stream = tmp_path / "m.mccs"
        main(["encode", "--in", str(motion), "--model", str(model), "--out", str(stream)])
        raw = bytearray(stream.read_bytes())
        raw[10] ^= 0xFF
        stream.write_bytes(bytes(raw))
        rc = main(["decode", "--in", str(stream), "--model", str(model),
                   "--out", str(tmp_path / "r.csv")])
        assert rc == 4

    def test_model_mismatch_exit_code(self, workspace):
        tmp_path, motion, model = workspace
        other = tmp_path / "other.csv"
        main(["gen", "--J", "5", "--F", "30", "--rank", "2", "--out", str(other)])
        rc = main(["encode", "--in", str(other), "--model", str(model),
                   "--out", str(tmp_path / "x.mccs")])
        assert rc == 5

    def test_missing_file_exit_code(self, workspace):
        tmp_path, _, model = workspace
        rc = main(["encode", "--in", str(tmp_path / "nope.csv"), "--model", str(model),
                   "--out", str(tmp_path / "x.mccs")])
        assert rc == 3


class TestBench:
    def test_writes_csv_and_figures(self, workspace):
        tmp_path, motion, model = workspace
        out_dir = tmp_path / "bench"
        rc = main(["bench", "--in", str(motion), "--model", str(model),
                   "--codec", "both", "--b", "6,8", "--L", "30",
                   "--sparsity", "0.25,0.5", "--plot", "--out-dir", str(out_dir)])
        assert rc == 0
        rd = (out_dir / "rd.csv").read_text().splitlines()
        assert rd[1] == "codec,L,b,CR,D"
        assert len(rd) == 2 + 2 + 2  # provenance + header + 2 frame + 2 clip
        sp = (out_dir / "sparsity.csv").read_text().splitlines()
        assert sp[1] == "transform,fraction,D"
        assert len(sp) == 2 + 3 * 2  # three transforms, two fractions
        for fig in ("rd.png", "sparsity.png"):
            assert (out_dir / fig).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_empty_b_rejected(self, workspace):
        tmp_path, motion, model = workspace
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--in", str(motion), "--model", str(model), "--b", ""])
        assert exc.value.code == 2


class TestThreads:
    def test_env_fallback(self, workspace, monkeypatch):
        tmp_path, motion, _ = workspace
        monkeypatch.setenv("MCCODEC_THREADS", "2")
        rc = main(["train", "--in", str(motion), "--out", str(tmp_path / "t.lsdt"),
                   "--P", "2", "--K", "5"])
        assert rc == 0

    def test_flag_overrides(self, workspace):
        tmp_path, motion, _ = workspace
        rc = main(["--threads", "3", "train", "--in", str(motion),
                   "--out", str(tmp_path / "t2.lsdt"), "--P", "2", "--K", "5"])
        assert rc == 0
