"""Command-line entry point: train, encode, decode, eval, bench, gen.

Exit codes: 0 success, 2 usage error, 3 data error, 4 corrupt stream,
5 model/stream mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bitstream, codec, metrics, motion, training
from .errors import (
    DataError,
    FormatMismatchError,
    InvariantViolationError,
    ModelMismatchError,
    StreamCorruptError,
)
from .motion import DIMS

EXIT_DATA = 3
EXIT_CORRUPT = 4
EXIT_MISMATCH = 5


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _provenance(args) -> str:
    skip = {"func"}
    items = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip]
    return "# mocapcodec " + " ".join(items)


def _write_csv(path, provenance: str, rows: list[str]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(provenance + "\n")
        fh.write("\n".join(rows) + "\n")


def _load_seq(path, fmt, J):
    fmt = fmt or motion.guess_format(path)
    return motion.load_motion(path, format=fmt, J=J)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("MCCODEC_THREADS", "1"))


def cmd_train(args, parser):
    if args.P < 1:
        parser.error(f"--P must be >= 1, got {args.P}")
    if args.K < 1:
        parser.error(f"--K must be >= 1, got {args.K}")
    seqs = [_load_seq(p, args.format, args.J) for p in args.inputs]
    batch = training.batch_from_sequences(
        seqs, residuals=args.residuals, source=";".join(args.inputs)
    )
    model = training.train_lsdt(
        batch, P=args.P, K=args.K, tol=args.tol, init=args.init, threads=_threads(args)
    )
    training.save_model(model, args.out)
    for d in DIMS:
        trace = model.meta.objective_trace[d]
        print(f"dim {d}: final objective {trace[-1]:.6g} after {len(trace)} iterations")
    if args.convergence_csv:
        _write_csv(
            args.convergence_csv,
            _provenance(args),
            metrics.convergence_csv_rows(model),
        )
    if args.plot:
        from . import plotting

        plotting.plot_convergence(model, args.plot)
    print(f"model written to {args.out} (J={model.J}, P={args.P}, N={batch.N})")
    return 0


def cmd_encode(args, parser):
    if args.codec == "clip" and args.L < 1:
        parser.error(f"--L must be >= 1, got {args.L}")
    seq = _load_seq(args.input, args.format, args.J)
    model = training.load_model(args.model)
    if args.codec == "frame":
        stream = codec.encode_frame_based(seq, model, args.b, mode=args.mode)
    else:
        stream = codec.encode_clip_based(seq, model, args.L, args.b)
    bitstream.write_stream(stream, args.out)
    cr = metrics.compression_ratio(seq.F, seq.J, stream)
    print(f"CR={cr:.4g}")
    return 0


def cmd_decode(args, parser):
    stream = bitstream.read_stream(args.input)
    model = training.load_model(args.model)
    seq = codec.decode(stream, model, frame_rate=args.fps)
    fmt = args.format or motion.guess_format(args.out)
    motion.save_motion(seq, args.out, format=fmt)
    return 0


def cmd_eval(args, parser):
    orig = _load_seq(args.original, args.format, args.J)
    recon = _load_seq(args.reconstructed, args.format, args.J)
    D = metrics.distortion(orig, recon)
    print(f"D={D:.6g}")
    if args.per_joint:
        per_joint = metrics.per_joint_distortion(orig, recon)
        rows = ["joint,D"] + [f"{j},{v:.6g}" for j, v in enumerate(per_joint)]
        _write_csv(args.per_joint, _provenance(args), rows)
    return 0


def cmd_bench(args, parser):
    if not args.b:
        parser.error("--b must list at least one bit depth")
    seq = _load_seq(args.input, args.format, args.J)
    model = training.load_model(args.model)
    os.makedirs(args.out_dir, exist_ok=True)
    points = metrics.rd_sweep(seq, model, args.codec, args.b, args.L)
    rd_path = os.path.join(args.out_dir, "rd.csv")
    _write_csv(rd_path, _provenance(args), metrics.rd_csv_rows(points))
    print(f"wrote {rd_path} ({len(points)} points)")
    spoints = []
    if args.sparsity:
        for name in ("lsdt", "dct", "dwt"):
            spoints += metrics.sparsity_distortion_curve(
                seq, name, args.sparsity, model=model
            )
        sp_path = os.path.join(args.out_dir, "sparsity.csv")
        _write_csv(sp_path, _provenance(args), metrics.sparsity_csv_rows(spoints))
        print(f"wrote {sp_path}")
    if args.plot:
        from . import plotting

        plotting.plot_rd_curves(points, os.path.join(args.out_dir, "rd.png"))
        if spoints:
            plotting.plot_sparsity_curves(
                spoints, os.path.join(args.out_dir, "sparsity.png")
            )
    return 0


def cmd_gen(args, parser):
    if args.rank < 1 or args.rank > args.J:
        parser.error(f"--rank must be in [1, J], got {args.rank}")
    seq = metrics.gen_synthetic(
        args.J,
        args.F,
        rank=args.rank,
        seed=args.seed,
        frame_rate=args.fps,
        amplitude=args.amplitude,
        translation=args.translation,
    )
    fmt = args.format or motion.guess_format(args.out)
    motion.save_motion(seq, args.out, format=fmt)
    print(f"wrote {args.out} (J={args.J}, F={args.F}, seed={args.seed})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mocapcodec",
        description="Mocap compression with a learned orthogonal spatial transform.",
    )
    parser.add_argument(
        "--threads", type=int, default=None, help="cap library parallelism (default: MCCODEC_THREADS or 1)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn spatial decorrelation bases")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="MOTION")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--P", type=int, default=training.DEFAULT_P, help="sparsity target (default 8)")
    p.add_argument("--K", type=int, default=training.DEFAULT_K, help="max iterations (default 500)")
    p.add_argument("--tol", type=float, default=training.DEFAULT_TOL)
    p.add_argument("--init", choices=("dct", "haar", "identity"), default="dct")
    p.add_argument("--residuals", action="store_true", help="train on frame differences")
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.add_argument("--J", type=int, help="marker count for headerless CSV")
    p.add_argument("--convergence-csv", help="write per-iteration objectives")
    p.add_argument("--plot", help="write a convergence figure (PNG path)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="compress a motion file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--codec", choices=("frame", "clip"), default="clip")
    p.add_argument("--b", type=int, default=10, help="quantizer bit depth")
    p.add_argument("--L", type=int, default=240, help="clip length (clip codec)")
    p.add_argument("--mode", choices=("offline", "streaming"), default="offline")
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.add_argument("--J", type=int)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decompress a stream")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fps", type=float, default=120.0)
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="distortion between two motion files")
    p.add_argument("original")
    p.add_argument("reconstructed")
    p.add_argument("--per-joint", help="write per-joint distortion CSV")
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.add_argument("--J", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="rate-distortion and sparsity sweeps")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--codec", choices=("frame", "clip", "both"), default="both")
    p.add_argument("--b", type=_int_list, default=[6, 8, 10, 12])
    p.add_argument("--L", type=_int_list, default=[240])
    p.add_argument("--sparsity", type=_float_list, help="fractions for sparsity curves")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.add_argument("--J", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a deterministic synthetic sequence")
    p.add_argument("--J", type=int, default=31)
    p.add_argument("--F", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, default=8)
    p.add_argument("--fps", type=float, default=120.0)
    p.add_argument("--amplitude", type=float, default=10.0)
    p.add_argument("--translation", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "raw-f32"))
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except StreamCorruptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except (ModelMismatchError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (DataError, FormatMismatchError, InvariantViolationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
