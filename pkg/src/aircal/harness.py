"""Experiment orchestration: matching, statistics, training and the
train-predict MAE matrix.

Every function here is deterministic in its inputs and seeds and writes its
files atomically, so rerunning a command reproduces its outputs byte for byte.
"""
from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .atomic import atomic_write
from .errors import AircalError, PlanError
from .gaussianity import NormalityReport, normality_report
from .ingestion import format_sensor_csv, format_truth_csv, filter_span, parse_sensor_csv, parse_truth_csv
from .matching import MatchedDataSet, format_matched_csv, match_windows, parse_matched_csv
from .metrics import METRIC_HEADER, MetricRow, metric_row
from .models import KINDS, Model, TrainConfig, predict, train_model
from .synth import Preset, generate
from .timeseries import CovarianceMatrix2, align_truncate, covariance2

log = logging.getLogger(__name__)


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8-sig")


# ---- matching -------------------------------------------------------------

@dataclass(frozen=True)
class MatchSummary:
    truth_points: int
    kept: int
    padded: int
    discarded: int

    def line(self) -> str:
        return (f"truth points {self.truth_points}: kept {self.kept} "
                f"(padded {self.padded}), discarded {self.discarded}")


def run_match(sensor_text: str, truth_text: str, window_s: int = 60,
              provenance: tuple[str, ...] = ()) -> tuple[MatchedDataSet, MatchSummary]:
    sensor = parse_sensor_csv(sensor_text)
    truth = parse_truth_csv(truth_text)
    ds = match_windows(sensor, truth, window_s)
    if provenance:
        ds = MatchedDataSet(ds.epoch_s, ds.features, ds.labels, ds.imputed, provenance)
    padded = int(np.count_nonzero(ds.imputed))
    return ds, MatchSummary(len(truth), len(ds), padded, len(truth) - len(ds))


def load_matched(path: str | Path) -> MatchedDataSet:
    return parse_matched_csv(read_text(path), (str(path),))


# ---- statistics -----------------------------------------------------------

def feature_label_covariance(ds: MatchedDataSet) -> CovarianceMatrix2:
    """Covariance of the per-sample sensor mean against the truth label."""
    return covariance2(ds.features.mean(axis=1), ds.labels)


def pair_covariance(a: MatchedDataSet, b: MatchedDataSet) -> CovarianceMatrix2:
    """Label streams of two sets, truncated to the shorter from the start."""
    x, y = align_truncate(a.labels, b.labels)
    return covariance2(x, y)


def histogram_csv(cell) -> str:
    h = cell.histogram
    rows = ["bin_left,bin_right,count"]
    for lo, hi, c in zip(h.bin_edges[:-1].tolist(), h.bin_edges[1:].tolist(), h.counts.tolist()):
        rows.append(f"{lo!r},{hi!r},{c}")
    return "\n".join(rows) + "\n"


def write_stats(ds: MatchedDataSet, out_dir: str | Path, bins: int = 50,
                pairs: dict[str, MatchedDataSet] | None = None) -> NormalityReport:
    """Normality tables, per-slice histograms and covariance matrices."""
    out = Path(out_dir)
    (out / "histograms").mkdir(parents=True, exist_ok=True)
    report = normality_report(ds, bins=bins)
    atomic_write(out / "normality.csv", report.to_csv())
    atomic_write(out / "normality.txt", report.to_text())
    for cell in report.cells:
        if cell.histogram is not None:
            atomic_write(out / "histograms" / f"{cell.series}_k{cell.k}_s{cell.slice_index}.csv",
                         histogram_csv(cell))
    blocks = []
    try:
        blocks.append("Covariance matrix (sensor window mean, truth)\n" + feature_label_covariance(ds).format())
    except AircalError as exc:
        blocks.append(f"Covariance matrix (sensor window mean, truth)\nunavailable: {type(exc).__name__}")
    for name, other in (pairs or {}).items():
        try:
            blocks.append(f"Covariance matrix (truth, truth of {name})\n" + pair_covariance(ds, other).format())
        except AircalError as exc:
            blocks.append(f"Covariance matrix (truth, truth of {name})\nunavailable: {type(exc).__name__}")
    atomic_write(out / "covariance.txt", "\n\n".join(blocks) + "\n")
    return report


# ---- training -------------------------------------------------------------

def training_log(model: Model) -> str:
    meta = model.metadata
    if "val_mae_history" in meta:
        rows = ["epoch,train_loss,val_mae"]
        for i, (tl, vm) in enumerate(zip(meta["train_loss_history"], meta["val_mae_history"]), start=1):
            rows.append(f"{i},{tl!r},{vm!r}")
        return "\n".join(rows) + "\n"
    rows = ["key,value"]
    for key in ("n_train", "n_val", "val_mae", "converged", "iterations", "gamma", "fingerprint"):
        if key in meta:
            rows.append(f"{key},{meta[key]}")
    return "\n".join(rows) + "\n"


# ---- train-predict matrix -------------------------------------------------

@dataclass
class ExperimentPlan:
    sets: dict[str, Path]
    kinds: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...]
    seeds: tuple[int, ...] = (0,)
    output: Path = Path("results")
    validation_fraction: float = 0.2

    def validate(self) -> None:
        if not self.sets:
            raise PlanError("plan lists no data sets")
        if not self.pairs:
            raise PlanError("plan has no (train, predict) pairs")
        for a, b in self.pairs:
            for name in (a, b):
                if name not in self.sets:
                    raise PlanError(f"pair {a}>{b} references unknown set {name!r}")
        for name, path in self.sets.items():
            if not path.is_file():
                raise PlanError(f"set {name!r}: no such file {path}")
        bad = [k for k in self.kinds if k not in KINDS]
        if bad or not self.kinds:
            raise PlanError(f"unknown or missing model kinds {bad}; expected some of {KINDS}")
        if not self.seeds:
            raise PlanError("plan lists no seeds")


def _split_list(raw: str) -> list[str]:
    return [s.strip() for s in raw.replace("\n", ",").split(",") if s.strip()]


def parse_plan(text: str, base_dir: str | Path = ".") -> ExperimentPlan:
    """Read a plan file::

        [sets]
        early = early.csv          # paths relative to the plan file
        late = late.csv
        [run]
        models = rfr, svr
        pairs = all                # or: early>late, late>late
        seeds = 0
        output = results
    """
    base = Path(base_dir)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise PlanError(str(exc)) from None
    if "sets" not in cp:
        raise PlanError("plan needs a [sets] section")
    sets = {name: base / path.strip() for name, path in cp["sets"].items()}
    run = cp["run"] if "run" in cp else {}
    kinds = tuple(_split_list(run.get("models", ",".join(KINDS))))
    raw_pairs = run.get("pairs", "all").strip()
    if raw_pairs == "all":
        pairs = tuple((a, b) for a in sets for b in sets)
    else:
        pairs = []
        for item in _split_list(raw_pairs):
            if ">" not in item:
                raise PlanError(f"pair {item!r} must read train>predict")
            a, b = (s.strip() for s in item.split(">", 1))
            pairs.append((a, b))
        pairs = tuple(pairs)
    try:
        seeds = tuple(int(s) for s in _split_list(run.get("seeds", "0")))
        fraction = float(run.get("validation_fraction", "0.2"))
    except ValueError as exc:
        raise PlanError(str(exc)) from None
    plan = ExperimentPlan(sets, kinds, pairs, seeds, base / run.get("output", "results").strip(), fraction)
    plan.validate()
    return plan


@dataclass
class CellResult:
    model: str
    train_set: str
    predict_set: str
    seed: int
    causal: bool
    row: MetricRow | None = None
    error: str = ""


@dataclass
class MatrixResult:
    set_names: tuple[str, ...]
    cells: list[CellResult] = field(default_factory=list)

    def grid(self, kind: str, seed: int | None = None) -> np.ndarray:
        """K x K MAE grid, rows = train set, columns = predict set; NaN where
        the cell was not planned or failed."""
        idx = {n: i for i, n in enumerate(self.set_names)}
        g = np.full((len(idx), len(idx)), np.nan)
        for c in self.cells:
            if c.model == kind and (seed is None or c.seed == seed) and c.row is not None:
                g[idx[c.train_set], idx[c.predict_set]] = c.row.mae
        return g

    def metrics_csv(self) -> str:
        rows = [METRIC_HEADER]
        for c in self.cells:
            if c.row is not None:
                rows.append(c.row.csv_row(c.train_set, c.predict_set, c.model))
        return "\n".join(rows) + "\n"

    def cells_csv(self) -> str:
        rows = ["train_set,predict_set,model,seed,causal,status,detail"]
        for c in self.cells:
            status = "ok" if c.row is not None else "failed"
            detail = c.error or ";".join(f"{k}:{v}" for k, v in (c.row.missing.items() if c.row else ()))
            rows.append(f"{c.train_set},{c.predict_set},{c.model},{c.seed},{str(c.causal).lower()},{status},{detail}")
        return "\n".join(rows) + "\n"

    def matrix_csv(self, kind: str, seed: int | None = None) -> str:
        g = self.grid(kind, seed)
        rows = ["train\\predict," + ",".join(self.set_names)]
        for name, row in zip(self.set_names, g):
            rows.append(name + "," + ",".join("" if np.isnan(v) else repr(float(v)) for v in row))
        return "\n".join(rows) + "\n"

    def matrix_text(self, kind: str, seed: int | None = None) -> str:
        g = self.grid(kind, seed)
        flags = {(c.train_set, c.predict_set) for c in self.cells if c.model == kind and not c.causal}
        width = max(8, *(len(n) for n in self.set_names)) + 2
        lines = [f"Train-predict MAE (ppm), {kind}",
                 "Train\\Predict".ljust(width + 2) + "".join(n.rjust(width) for n in self.set_names)]
        for name, row in zip(self.set_names, g):
            cells = []
            for other, v in zip(self.set_names, row):
                text = "-" if np.isnan(v) else f"{v:.3f}"
                cells.append((text + ("*" if (name, other) in flags else " ")).rjust(width))
            lines.append(name.ljust(width + 2) + "".join(cells))
        if flags:
            lines.append("* non-causal: the model was trained on data later than it predicts")
        return "\n".join(lines) + "\n"


def is_causal(train: MatchedDataSet, target: MatchedDataSet) -> bool:
    """A pair is non-causal when the training period starts after the
    predicted one."""
    if len(train) == 0 or len(target) == 0:
        return True
    return int(train.epoch_s[0]) <= int(target.epoch_s[0])


def evaluate(model: Model, ds: MatchedDataSet) -> MetricRow:
    """Metrics over the whole predict set, including rows seen in training."""
    return metric_row(predict(model, ds.features), ds.labels)


def run_matrix(sets: dict[str, MatchedDataSet], kinds, pairs, seeds=(0,),
               validation_fraction: float = 0.2) -> MatrixResult:
    result = MatrixResult(tuple(sets))
    for seed in seeds:
        for kind in kinds:
            models: dict[str, Model | str] = {}
            for train_name, predict_name in pairs:
                if train_name not in models:
                    try:
                        cfg = TrainConfig(kind, validation_fraction, seed)
                        models[train_name] = train_model(sets[train_name], cfg)
                        log.info("trained %s on %s (seed %d)", kind, train_name, seed)
                    except AircalError as exc:
                        models[train_name] = f"{type(exc).__name__}: {exc}"
                        log.warning("training %s on %s failed: %s", kind, train_name, exc)
                model = models[train_name]
                cell = CellResult(kind, train_name, predict_name, seed,
                                  is_causal(sets[train_name], sets[predict_name]))
                if isinstance(model, str):
                    cell.error = model
                else:
                    try:
                        cell.row = evaluate(model, sets[predict_name])
                    except AircalError as exc:
                        cell.error = f"{type(exc).__name__}: {exc}"
                result.cells.append(cell)
    return result


def write_matrix(result: MatrixResult, out_dir: str | Path, kinds, seeds=(0,)) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "metrics.csv", result.metrics_csv())
    atomic_write(out / "cells.csv", result.cells_csv())
    texts = ["Same-set rows evaluate the whole predict set, including the training split.\n"]
    for seed in seeds:
        suffix = "" if len(seeds) == 1 else f"_seed{seed}"
        for kind in kinds:
            atomic_write(out / f"matrix_{kind}{suffix}.csv", result.matrix_csv(kind, seed))
            texts.append((f"seed {seed}\n" if len(seeds) > 1 else "") + result.matrix_text(kind, seed))
    atomic_write(out / "summary.txt", "\n".join(texts))


def run_plan(plan: ExperimentPlan) -> MatrixResult:
    plan.validate()
    sets = {name: load_matched(path) for name, path in plan.sets.items()}
    result = run_matrix(sets, plan.kinds, plan.pairs, plan.seeds, plan.validation_fraction)
    write_matrix(result, plan.output, plan.kinds, plan.seeds)
    return result


# ---- synthetic data -------------------------------------------------------

def write_synth(preset: Preset, out_dir: str | Path) -> list[Path]:
    """sensor.csv and truth.csv for the whole run, plus one pair per named span."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth, sensor = generate(preset)
    if len(sensor) == 0:
        log.warning("the sensor stream is empty (every reading was dropped)")
    written = []
    for stem, s, t in [("", sensor, truth)] + [
            (f"_{name}", filter_span(sensor, span), filter_span(truth, span))
            for name, span in zip(preset.span_names, preset.spans)]:
        for kind, series, fmt in (("sensor", s, format_sensor_csv), ("truth", t, format_truth_csv)):
            path = out / f"{kind}{stem}.csv"
            atomic_write(path, fmt(series))
            written.append(path)
    return written


__all__ = ["MatchSummary", "run_match", "load_matched", "write_stats", "feature_label_covariance",
           "pair_covariance", "training_log", "ExperimentPlan", "parse_plan", "CellResult", "MatrixResult",
           "run_matrix", "write_matrix", "run_plan", "evaluate", "is_causal", "write_synth", "read_text",
           "format_matched_csv"]
