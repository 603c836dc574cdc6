"""Covariance regime and normality summary of a synthetic preset.

    python3 scripts/stats_regime.py --preset default --out results/stats
"""
import argparse
import math
from pathlib import Path

from aircal import harness
from aircal.matching import match_windows
from aircal.synth import generate, load_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="default")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bins", type=int, default=50)
    ap.add_argument("--out", type=Path, help="also write the full stats report here")
    args = ap.parse_args()

    truth, sensor = generate(load_preset(args.preset).with_seed(args.seed))
    ds = match_windows(sensor, truth, 60)
    cov = harness.feature_label_covariance(ds)
    var_s, var_t, cross = cov.array[0, 0], cov.array[1, 1], cov.array[0, 1]
    print("Covariance matrix (sensor window mean, truth)")
    print(cov.format(2))
    print(f"var ratio {var_s / var_t:.1f}, cross / sqrt(var var) {cross / math.sqrt(var_s * var_t):+.4f}")
    if args.out:
        report = harness.write_stats(ds, args.out, args.bins)
        print(report.to_text())
        print(f"report written to {args.out}")


if __name__ == "__main__":
    main()
