"""Time-series containers, equal slicing, summary statistics and 2x2 covariance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptySeries, LengthMismatch, TooFewValues


@dataclass(frozen=True)
class TimePoint:
    epoch_s: int
    value: float

    def __post_init__(self):
        if self.epoch_s < 0:
            raise ValueError(f"negative epoch: {self.epoch_s}")
        if not np.isfinite(self.value):
            raise ValueError(f"non-finite value at {self.epoch_s}")


@dataclass(frozen=True, eq=False)
class Series:
    """Timestamped ppm readings stored column-wise.

    ``epoch_s`` is int64 Unix seconds (non-decreasing), ``values`` float64 ppm.
    Both arrays are made read-only on construction.
    """

    epoch_s: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.epoch_s, dtype=np.int64).copy()
        v = np.asarray(self.values, dtype=np.float64).copy()
        if t.ndim != 1 or t.shape != v.shape:
            raise LengthMismatch("epoch_s and values must be 1-D of equal length")
        if t.size and (t[0] < 0 or np.any(np.diff(t) < 0)):
            raise ValueError("timestamps must be non-negative and non-decreasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "epoch_s", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_points(cls, points: Sequence[TimePoint], label: str = "") -> "Series":
        return cls(
            np.array([p.epoch_s for p in points], dtype=np.int64),
            np.array([p.value for p in points], dtype=np.float64),
            label,
        )

    @property
    def points(self) -> list[TimePoint]:
        return list(self)

    def __iter__(self) -> Iterator[TimePoint]:
        for t, v in zip(self.epoch_s.tolist(), self.values.tolist()):
            yield TimePoint(t, v)

    def __len__(self) -> int:
        return int(self.epoch_s.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.epoch_s, other.epoch_s)
            and np.array_equal(self.values, other.values)
        )

    def select(self, mask: np.ndarray, label: str | None = None) -> "Series":
        return Series(self.epoch_s[mask], self.values[mask], self.label if label is None else label)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class CovarianceMatrix2:
    entries: tuple[tuple[float, float], tuple[float, float]]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64)

    def format(self, precision: int = 8) -> str:
        """Two-row bracketed layout, one matrix row per line."""
        cells = [[f"{v:.{precision}f}" for v in row] for row in self.entries]
        width = max(len(c) for row in cells for c in row)
        lines = ["  ".join(c.rjust(width) for c in row) for row in cells]
        return "[ " + lines[0] + " ]\n[ " + lines[1] + " ]"


def _as_values(x) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=np.float64).ravel()


def summary(series) -> SummaryStats:
    """Sample statistics (n-1 std) of a Series or a plain value list."""
    v = _as_values(series)
    if v.size == 0:
        raise EmptySeries("summary of an empty series")
    n = int(v.size)
    mean = float(v.mean())
    std = float(v.std(ddof=1)) if n > 1 else 0.0
    lo, hi = float(v.min()), float(v.max())
    # keep min <= mean <= max despite summation rounding
    mean = min(max(mean, lo), hi)
    return SummaryStats(n, mean, std, lo, hi)


def slice_equal(values, k: int) -> list[list[float]]:
    """Split ``values`` into ``k`` contiguous slices; the first ``len % k`` get one extra."""
    seq = _as_values(values).tolist() if isinstance(values, (Series, np.ndarray)) else list(values)
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(seq)
    if n < k:
        raise TooFewValues(f"{n} values cannot fill {k} slices")
    base, extra = divmod(n, k)
    out, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        out.append(seq[start:start + size])
        start += size
    return out


def align_truncate(a, b) -> tuple[list[float], list[float]]:
    a, b = list(a), list(b)
    if not a or not b:
        raise EmptySeries("align_truncate needs two non-empty inputs")
    n = min(len(a), len(b))
    return a[:n], b[:n]


def covariance2(a, b) -> CovarianceMatrix2:
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise TooFewValues("covariance needs at least two paired values")
    dx = x - x.mean()
    dy = y - y.mean()
    d = x.size - 1
    vxx = float(dx @ dx) / d
    vyy = float(dy @ dy) / d
    vxy = float(dx @ dy) / d
    return CovarianceMatrix2(((vxx, vxy), (vxy, vyy)))
