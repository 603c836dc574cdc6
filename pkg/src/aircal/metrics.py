"""Calibration scores: MAE, accuracy %, R^2, Pearson, and binned KL / JS divergences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (AircalError, EmptyInput, LengthMismatch, ZeroTruthValue, ZeroVariance,
                     ZeroVarianceTruth)

DEFAULT_BINS = 100
SMOOTHING = 1e-10
LN2 = math.log(2.0)
METRIC_NAMES = ("mae", "accuracy_pct", "r2", "pearson", "kl", "js")
METRIC_HEADER = "train_set,predict_set,model," + ",".join(METRIC_NAMES)


@dataclass(frozen=True, eq=False)
class PredictionPair:
    yhat: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        yhat = np.asarray(self.yhat, dtype=np.float64).ravel()
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if yhat.size != y.size:
            raise LengthMismatch(f"{yhat.size} predictions vs {y.size} truth values")
        if y.size == 0:
            raise EmptyInput("empty prediction pair")
        if not (np.all(np.isfinite(yhat)) and np.all(np.isfinite(y))):
            raise ValueError("prediction pair contains non-finite values")
        object.__setattr__(self, "yhat", yhat)
        object.__setattr__(self, "y", y)


def _pair(yhat, y=None) -> PredictionPair:
    if isinstance(yhat, PredictionPair):
        return yhat
    return PredictionPair(yhat, y)


def mae(yhat, y=None) -> float:
    p = _pair(yhat, y)
    return float(np.mean(np.abs(p.yhat - p.y)))


def accuracy_percent(yhat, y=None) -> float:
    """100 minus the mean absolute percentage error; unbounded below."""
    p = _pair(yhat, y)
    if np.any(p.y == 0):
        raise ZeroTruthValue("accuracy is undefined for a zero truth value")
    return float(100.0 - np.mean(100.0 * np.abs(p.yhat - p.y) / p.y))


def r_squared(yhat, y=None) -> float:
    p = _pair(yhat, y)
    dev = p.y - p.y.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        raise ZeroVarianceTruth("R^2 needs truth values with non-zero variance")
    res = p.y - p.yhat
    return 1.0 - float(res @ res) / ss_tot


def pearson(yhat, y=None) -> float:
    p = _pair(yhat, y)
    if p.y.size < 2:
        raise ZeroVariance("correlation needs at least two points")
    a = p.yhat - p.yhat.mean()
    b = p.y - p.y.mean()
    saa, sbb = float(a @ a), float(b @ b)
    if saa == 0.0 or sbb == 0.0:
        raise ZeroVariance("correlation undefined for a constant series")
    r = float(a @ b) / math.sqrt(saa * sbb)
    return min(max(r, -1.0), 1.0)


@dataclass(frozen=True, eq=False)
class BinnedPair:
    """Predicted (``P``) and truth (``Q``) masses over shared edges."""

    edges: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    @property
    def M(self) -> int:
        return int(self.P.size)

    @classmethod
    def from_masses(cls, P, Q, smoothing: float = SMOOTHING, edges=None) -> "BinnedPair":
        """Normalise raw masses after adding ``smoothing`` to every bin."""
        P = np.asarray(P, dtype=np.float64) + smoothing
        Q = np.asarray(Q, dtype=np.float64) + smoothing
        if P.shape != Q.shape or P.ndim != 1 or P.size == 0:
            raise LengthMismatch("mass vectors must be 1-D and of equal length")
        if edges is None:
            edges = np.arange(P.size + 1, dtype=np.float64)
        return cls(np.asarray(edges, dtype=np.float64), P / P.sum(), Q / Q.sum())


def bin_pair(yhat, y=None, bins: int = DEFAULT_BINS) -> BinnedPair:
    p = _pair(yhat, y)
    if bins < 2:
        raise ValueError("bins must be >= 2")
    lo = float(min(p.yhat.min(), p.y.min()))
    hi = float(max(p.yhat.max(), p.y.max()))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    P, edges = np.histogram(p.yhat, bins=bins, range=(lo, hi))
    Q, _ = np.histogram(p.y, bins=edges)
    return BinnedPair.from_masses(P, Q, edges=edges)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def kl_divergence(b: BinnedPair) -> float:
    """KL(P || Q) in nats: predictions relative to truth."""
    return max(_kl(b.P, b.Q), 0.0)


def js_divergence(b: BinnedPair) -> float:
    m = 0.5 * (b.P + b.Q)
    js = 0.5 * _kl(b.Q, m) + 0.5 * _kl(b.P, m)
    return min(max(js, 0.0), LN2)


@dataclass
class MetricRow:
    mae: float | None = None
    accuracy_pct: float | None = None
    r2: float | None = None
    pearson: float | None = None
    kl: float | None = None
    js: float | None = None
    missing: dict[str, str] = field(default_factory=dict)
    bins: int = DEFAULT_BINS

    def values(self) -> tuple:
        return tuple(getattr(self, k) for k in METRIC_NAMES)

    def csv_row(self, train_set: str, predict_set: str, model: str) -> str:
        cells = ["" if v is None else repr(float(v)) for v in self.values()]
        return ",".join([train_set, predict_set, model, *cells])


def metric_row(yhat, y=None, bins: int = DEFAULT_BINS) -> MetricRow:
    p = _pair(yhat, y)
    row = MetricRow(bins=bins)
    for name, fn in (("mae", mae), ("accuracy_pct", accuracy_percent),
                     ("r2", r_squared), ("pearson", pearson)):
        try:
            setattr(row, name, fn(p))
        except AircalError as exc:
            row.missing[name] = type(exc).__name__
    b = bin_pair(p, bins=bins)
    row.kl = kl_divergence(b)
    row.js = js_divergence(b)
    return row
