"""Command-line entry point: ``aircal {match,stats,train,predict,matrix,synth}``.

Exit codes: 0 success (possibly with warnings), 2 input errors, 3 training
failures.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .atomic import atomic_write
from .errors import AircalError, NonFiniteLoss, TooFewSamples, ZeroVarianceColumn
from .metrics import METRIC_HEADER, metric_row
from .models import KINDS, TrainConfig, load_model, predict, save_model, train_model
from .synth import load_preset

EXIT_INPUT = 2
EXIT_TRAIN = 3
TRAINING_ERRORS = (NonFiniteLoss, TooFewSamples, ZeroVarianceColumn)

log = logging.getLogger("aircal")


def _overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise AircalError(f"--set expects section.key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_match(args) -> int:
    ds, summary = harness.run_match(harness.read_text(args.sensor), harness.read_text(args.truth),
                                    args.window, (str(args.sensor), str(args.truth)))
    atomic_write(args.out, harness.format_matched_csv(ds))
    print(summary.line())
    return 0


def cmd_stats(args) -> int:
    ds = harness.load_matched(args.matched)
    pairs = {}
    for item in args.pair or []:
        name, _, path = item.partition("=")
        pairs[name] = harness.load_matched(path or name)
    report = harness.write_stats(ds, args.out, args.bins, pairs)
    failed = [c for c in report.cells if c.failed]
    for c in failed:
        log.warning("%s k=%d slice %d: %s", c.series, c.k, c.slice_index, ", ".join(c.errors.values()))
    print(f"{len(report.cells)} slice cells, {len(failed)} with failures; wrote {args.out}")
    return EXIT_INPUT if failed and len(failed) == len(report.cells) else 0


def _train_config(args) -> TrainConfig:
    cfg = TrainConfig(args.model, args.validation_fraction, args.seed)
    block = cfg.model
    changes = {}
    if args.lr is not None and hasattr(block, "lr"):
        changes["lr"] = args.lr
    if hasattr(block, "schedule"):
        sched = {k: v for k, v in (("epochs", args.epochs), ("batch_size", args.batch_size),
                                   ("patience", args.patience)) if v is not None}
        if sched:
            changes["schedule"] = dataclasses.replace(block.schedule, **sched)
    if changes:
        cfg = TrainConfig(args.model, args.validation_fraction, args.seed, dataclasses.replace(block, **changes))
    return cfg


def cmd_train(args) -> int:
    ds = harness.load_matched(args.matched)
    cfg = _train_config(args)
    model = train_model(ds, cfg)
    save_model(model, args.out)
    log_path = Path(args.log) if args.log else Path(str(args.out) + ".log.csv")
    atomic_write(log_path, harness.training_log(model))
    print(f"{args.model}: validation MAE {model.metadata['val_mae']:.4f} ppm; wrote {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ds = harness.load_matched(args.matched)
    yhat = predict(model, ds.features)
    rows = ["epoch_s,prediction,label"]
    for t, p, y in zip(ds.epoch_s.tolist(), yhat.tolist(), ds.labels.tolist()):
        rows.append(f"{t},{p!r},{y!r}")
    atomic_write(args.out, "\n".join(rows) + "\n")
    if len(ds):
        print(METRIC_HEADER)
        print(metric_row(yhat, ds.labels).csv_row("-", str(args.matched), model.kind))
    return 0


def cmd_matrix(args) -> int:
    plan = harness.parse_plan(harness.read_text(args.plan), Path(args.plan).parent)
    if args.out:
        plan.output = Path(args.out)
    result = harness.run_plan(plan)
    for seed in plan.seeds:
        for kind in plan.kinds:
            print(result.matrix_text(kind, seed))
    failed = sum(1 for c in result.cells if c.row is None)
    if failed:
        log.warning("%d of %d cells failed; see cells.csv", failed, len(result.cells))
    return 0


def cmd_synth(args) -> int:
    preset = load_preset(args.preset, _overrides(args.set)).with_seed(args.seed)
    paths = harness.write_synth(preset, args.out)
    print("wrote " + ", ".join(p.name for p in paths))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aircal", description="Low-cost CO2 sensor calibration toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("match", help="pair each truth reading with the sensor readings around it")
    s.add_argument("sensor", type=Path)
    s.add_argument("truth", type=Path)
    s.add_argument("out", type=Path, help="matched CSV to write")
    s.add_argument("--window", type=int, default=60, help="window width in seconds (default 60)")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("stats", help="normality tests, histograms and covariance of a matched set")
    s.add_argument("matched", type=Path)
    s.add_argument("out", type=Path, help="output directory")
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--pair", action="append", metavar="NAME=MATCHED_CSV",
                   help="also report the truth covariance against another set")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("train", help="fit one calibration model")
    s.add_argument("matched", type=Path)
    s.add_argument("out", type=Path, help="model file to write")
    s.add_argument("--model", choices=KINDS, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--validation-fraction", type=float, default=0.2)
    s.add_argument("--epochs", type=int, help="neural kinds: epoch cap")
    s.add_argument("--batch-size", type=int, help="neural kinds: mini-batch size")
    s.add_argument("--patience", type=int, help="neural kinds: early-stopping patience")
    s.add_argument("--lr", type=float, help="neural kinds: learning rate")
    s.add_argument("--log", type=Path, help="training log CSV (default: <out>.log.csv)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="apply a model file to a matched set")
    s.add_argument("model", type=Path)
    s.add_argument("matched", type=Path)
    s.add_argument("out", type=Path, help="predictions CSV to write")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("matrix", help="run a train-predict plan and write metric tables")
    s.add_argument("plan", type=Path)
    s.add_argument("--out", type=Path, help="override the plan's output directory")
    s.set_defaults(func=cmd_matrix)

    s = sub.add_parser("synth", help="generate synthetic sensor and truth streams")
    s.add_argument("preset", help="preset file or bundled name (default, drift)")
    s.add_argument("out", type=Path, help="output directory")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a preset value")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except TRAINING_ERRORS as exc:
        print(f"aircal {args.command}: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except (AircalError, OSError, UnicodeDecodeError) as exc:
        print(f"aircal {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
