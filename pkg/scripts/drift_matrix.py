"""Train-predict MAE matrices over the named spans of a drifting preset.

    python3 scripts/drift_matrix.py --preset drift --out results/drift
"""
import argparse
from pathlib import Path

from aircal import harness
from aircal.ingestion import filter_span
from aircal.matching import match_windows
from aircal.models import KINDS
from aircal.synth import generate, load_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="drift")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--models", nargs="+", choices=KINDS, default=["rfr", "svr"])
    ap.add_argument("--out", type=Path, default=Path("results/drift"))
    args = ap.parse_args()

    preset = load_preset(args.preset).with_seed(args.seed)
    if not preset.spans:
        ap.error(f"preset {args.preset!r} defines no [spans]")
    truth, sensor = generate(preset)
    sets = {name: match_windows(filter_span(sensor, span), filter_span(truth, span), 60)
            for name, span in zip(preset.span_names, preset.spans)}
    for name, ds in sets.items():
        print(f"{name}: {len(ds)} matched samples")
    pairs = [(a, b) for a in sets for b in sets]
    result = harness.run_matrix(sets, args.models, pairs, (args.seed,))
    harness.write_matrix(result, args.out, args.models, (args.seed,))
    for kind in args.models:
        print(result.matrix_text(kind, args.seed))
    print(f"tables written to {args.out}")


if __name__ == "__main__":
    main()
