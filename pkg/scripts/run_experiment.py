"""Run an experiment config and print the accuracy matrix.

    python scripts/run_experiment.py scripts/configs/detection.ini [--workers N]
"""
import argparse
import time
from dataclasses import replace

from mvsteg.experiment import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out")
    args = ap.parse_args()
    cfg = ExperimentConfig.load(args.config)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    start = time.time()
    res = run_experiment(cfg)

    qps = sorted({k[0] for k in res.reports})
    rates = sorted({k[1] for k in res.reports})
    print(f"matched calibration, mean accuracy over {cfg.repeats} splits")
    print("qp \\ rate " + "".join(f"{r:>9}" for r in rates))
    for qp in qps:
        cells = [res.reports.get((qp, r, qp)) for r in rates]
        print(f"{qp:>9} " + "".join(f"{c.mean:9.3f}" if c else " " * 9 for c in cells))
    mismatched = sorted(k for k in res.reports if k[0] != k[2])
    for qp, rate, cal in mismatched:
        base = res.reports[(qp, rate, qp)].mean
        acc = res.reports[(qp, rate, cal)].mean
        print(f"qp {qp} rate {rate} calibrated at {cal}: {acc:.3f} ({acc - base:+.3f})")
    print(f"done in {time.time() - start:.0f}s, reports in {cfg.out_dir}")


if __name__ == "__main__":
    main()
