"""PSkip share of P-frame macroblocks and retained-skip fraction versus qp.

Covers only; no SVM. Prints one line per qp and writes a CSV.
"""
import argparse
import csv

import numpy as np

from mvsteg.calibration import calibrate, retained_skip_fraction
from mvsteg.codec import PartitionKind, encode_sequence
from mvsteg.errors import NoSkipBlocks
from mvsteg.yuv_io import synthetic_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--frames", type=int, default=18)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--noise", type=int, default=1)
    ap.add_argument("--qps", type=int, nargs="+", default=[15, 20, 25, 30, 35])
    ap.add_argument("--out", default="results/skip_fraction.csv")
    args = ap.parse_args()

    corpus = synthetic_corpus(args.count, args.size, args.size, args.frames, args.seed,
                              noise=args.noise)
    rows = []
    for qp in args.qps:
        skip, kept = [], []
        for name, video in corpus:
            stream = encode_sequence(video, qp)
            recs = [r for f in stream.frames if not f.is_intra for r in f.records]
            skip.append(np.mean([r.partition is PartitionKind.PSkip for r in recs]))
            try:
                kept.append(retained_skip_fraction(calibrate(stream)))
            except NoSkipBlocks:
                pass    # nothing to retain; leave it out of the mean
        rows.append([qp, float(np.mean(skip)), float(np.mean(kept)) if kept else float("nan")])
        print(f"qp {qp}: pskip {rows[-1][1]:.3f}  retained after recompression {rows[-1][2]:.3f}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["qp", "pskip_fraction", "retained_skip_fraction"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
