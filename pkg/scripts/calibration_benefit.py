"""Raw-sensor MAE against held-out model MAE on a synthetic preset.

    python3 scripts/calibration_benefit.py --preset default --models rfr svr
"""
import argparse
import time

import numpy as np

from aircal.matching import match_windows
from aircal.models import KINDS, TrainConfig, predict, split_train_val, train_model
from aircal.synth import generate, load_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="default")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--models", nargs="+", choices=KINDS, default=["rfr", "svr"])
    args = ap.parse_args()

    truth, sensor = generate(load_preset(args.preset).with_seed(args.seed))
    ds = match_windows(sensor, truth, 60)
    _, val = split_train_val(ds, 0.2, args.seed)
    raw = float(np.mean(np.abs(val.features.mean(axis=1) - val.labels)))
    print(f"{len(ds)} matched samples, {len(val)} held out; raw sensor MAE {raw:.3f} ppm")
    for kind in args.models:
        t0 = time.perf_counter()
        model = train_model(ds, TrainConfig(kind, seed=args.seed))
        mae = float(np.mean(np.abs(predict(model, val.features) - val.labels)))
        print(f"{kind:9s} held-out MAE {mae:.3f} ppm ({100 * mae / raw:.1f}% of raw), "
              f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
