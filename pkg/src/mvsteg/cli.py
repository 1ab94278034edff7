"""``mvsteg`` command line: one subcommand per pipeline stage plus ``experiment``."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from . import classifier, features
from .calibration import calibrate
from .codec import decode_sequence, encode_sequence, read_stream, write_stream
from .codec.motion import STRATEGIES
from .errors import MvstegError
from .experiment import ExperimentConfig, run_experiment
from .stego import METHODS, EmbeddingPlan
from .yuv_io import MOTION_MODELS, generate_synthetic, read_yuv, write_yuv

PAIR_FIELDS = ["frame", "mb_row", "mb_col", "first_partition", "first_mvp_h", "first_mvp_v",
               "second_partition", "second_mvp_h", "second_mvp_v", "diff"]


class CommandError(MvstegError):
    pass


def _out(args, default=None):
    path = getattr(args, "out", None) or default
    if path is None:
        raise CommandError("--out is required")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return path


def _load_video(args):
    return read_yuv(args.input, args.width, args.height, pad=args.pad)


def cmd_gen(args):
    pan = tuple(args.pan) if args.pan else None
    video = generate_synthetic(args.width, args.height, args.frames, args.model, args.seed,
                               pan=pan, noise=args.noise)
    path = _out(args)
    write_yuv(path, video)
    print(f"wrote {video.n_frames} frames {video.width}x{video.height} to {path}")


def _encode(args, embedder=None):
    video = _load_video(args)
    stream = encode_sequence(video, args.qp, args.gop, args.search_range, args.strategy,
                             embedder=embedder, seed=args.seed)
    path = _out(args)
    write_stream(path, stream)
    return stream, path


def cmd_encode(args):
    stream, path = _encode(args)
    print(f"wrote {len(stream.frames)} frames at qp {args.qp} to {path}")


class _SessionRecorder:
    """Embedder wrapper that keeps the session so its counters can be reported."""

    def __init__(self, plan):
        self.plan, self.active, self.session = plan, plan.active, None

    def start(self):
        self.session = self.plan.start()
        return self.session


def cmd_embed(args):
    recorder = _SessionRecorder(EmbeddingPlan(args.method, args.rate, args.seed))
    _, path = _encode(args, recorder)
    s = recorder.session
    carriers, modified = (s.carriers, s.modified) if s else (0, 0)
    print(f"wrote stego stream to {path}: {carriers} carriers, {modified} modified MVs")


def cmd_decode(args):
    video, _ = decode_sequence(read_stream(args.input))
    path = _out(args)
    write_yuv(path, video)
    print(f"wrote {video.n_frames} frames {video.width}x{video.height} to {path}")


def cmd_calibrate(args):
    cal = calibrate(read_stream(args.input), args.qp_override,
                    keep_recompressed=bool(args.keep_recompressed))
    path = _out(args)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PAIR_FIELDS)
        for p in cal.pairs:
            w.writerow([p.frame_index, p.mb_row, p.mb_col, p.first.partition.name,
                        p.first.mvp.h, p.first.mvp.v, p.second.partition.name,
                        p.second.mvp.h, p.second.mvp.v,
                        features.mvp_diff(p.first.mvp, p.second.mvp)])
    if args.keep_recompressed:
        write_stream(args.keep_recompressed, cal.recompressed)
    print(f"wrote {len(cal.pairs)} pairs (qp {cal.qp_first} -> {cal.qp_second}) to {path}")


def cmd_features(args):
    rows = []
    for k, stream_path in enumerate(args.input):
        cal = calibrate(read_stream(stream_path), args.qp_override)
        vectors = features.extract_smcf(cal, args.window, args.mode)
        name = args.sequence_id[k] if args.sequence_id else \
            os.path.splitext(os.path.basename(stream_path))[0]
        rows += features.feature_rows(name, args.label, vectors)
    path = _out(args)
    features.write_feature_csv(path, rows)
    print(f"wrote {len(rows)} feature rows to {path}")


def _samples(paths):
    out = []
    for path in paths:
        for row in features.read_feature_csv(path):
            if row["label"] not in ("cover", "stego"):
                raise CommandError(f"{path}: label must be cover or stego, got {row['label']!r}")
            label = classifier.STEGO if row["label"] == "stego" else classifier.COVER
            out.append(classifier.LabeledSample(row["values"], label, row["sequence"]))
    if not out:
        raise CommandError("no feature rows")
    return out


def cmd_train(args):
    samples = _samples(args.input)
    if args.c is None or args.gamma is None:
        c, gamma = classifier.cross_validate(samples, folds=args.folds, seed=args.seed)
    else:
        c, gamma = args.c, args.gamma
    model = classifier.train(samples, c, gamma)
    path = _out(args)
    with open(path, "wb") as fh:
        fh.write(classifier.model_to_bytes(model))
    X = np.array([s.features for s in samples])
    y = np.array([s.label for s in samples])
    acc = float(np.mean(model.predict(X) == y))
    print(f"c={c!r} gamma={gamma!r} support vectors={len(model.support_vectors)} "
          f"training accuracy={acc:.4f}; model written to {path}")


def cmd_eval(args):
    samples = _samples(args.input)
    if args.model:
        with open(args.model, "rb") as fh:
            model = classifier.model_from_bytes(fh.read())
        X = np.array([s.features for s in samples])
        y = np.array([s.label for s in samples])
        acc = float(np.mean(model.predict(X) == y))
        print(f"accuracy={acc:.4f} on {len(samples)} samples")
        return
    report = classifier.evaluate(samples, args.repeats, args.train_fraction, args.seed,
                                 folds=args.folds)
    if getattr(args, "out", None):
        path = _out(args)
        classifier.write_report_csv(path, report)
    print(f"mean accuracy={report.mean:.4f} std={report.std:.4f} over {args.repeats} splits")


def cmd_experiment(args):
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides).validate()
    res = run_experiment(config)
    for (qp, rate, cal_qp), rep in sorted(res.reports.items()):
        print(f"qp={qp} rate={rate} calibration_qp={cal_qp}: "
              f"accuracy {rep.mean:.4f} +- {rep.std:.4f}")
    print(f"reports written to {config.out_dir}")


def _video_args(p):
    p.add_argument("input", help="raw 4:2:0 YUV file")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--pad", action="store_true", help="edge-pad to a multiple of 16")


def _codec_args(p):
    p.add_argument("--qp", type=int, default=25)
    p.add_argument("--gop", type=int, default=6)
    p.add_argument("--search-range", type=int, default=16)
    p.add_argument("--strategy", choices=STRATEGIES, default="hexagon")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")

    parser = argparse.ArgumentParser(prog="mvsteg", parents=[common],
                                     description="Motion-vector steganalysis toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic YUV sequence")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--frames", type=int, default=36)
    p.add_argument("--model", choices=MOTION_MODELS, default="global-pan")
    p.add_argument("--pan", type=float, nargs=2, metavar=("DX", "DY"))
    p.add_argument("--noise", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", parents=[common], help="encode YUV to a stream file")
    _video_args(p)
    _codec_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("embed", parents=[common], help="encode with in-loop MV embedding")
    _video_args(p)
    _codec_args(p)
    p.add_argument("--rate", type=float, default=0.2, help="bits per non-skip MV")
    p.add_argument("--method", choices=METHODS, default="lsb-match-random")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("decode", parents=[common], help="decode a stream to YUV")
    p.add_argument("input")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("calibrate", parents=[common], help="recompress and align macroblocks")
    p.add_argument("input")
    p.add_argument("--qp-override", type=int)
    p.add_argument("--keep-recompressed", metavar="PATH",
                   help="also write the recompressed stream")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("features", parents=[common], help="extract SMCF windows to CSV")
    p.add_argument("input", nargs="+", help="stream files")
    p.add_argument("--label", choices=("cover", "stego", "unknown"), default="unknown")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--mode", choices=features.MODES, default="non-overlapping")
    p.add_argument("--qp-override", type=int)
    p.add_argument("--sequence-id", nargs="+", help="ids matching the inputs (default: file stem)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common], help="train an SVM on feature CSVs")
    p.add_argument("input", nargs="+")
    p.add_argument("--c", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common],
                       help="repeated pair-split evaluation, or score a saved model")
    p.add_argument("input", nargs="+")
    p.add_argument("--model")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--train-fraction", type=float, default=0.6)
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", parents=[common], help="run a full experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "seed"):
        args.seed = 0
    if args.seed < 0:
        parser.error("--seed must be non-negative")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    if args.command == "features" and args.sequence_id and len(args.sequence_id) != len(args.input):
        parser.error("--sequence-id needs one id per input")
    try:
        args.func(args)
    except (MvstegError, OSError, ValueError) as exc:
        print(f"mvsteg {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
