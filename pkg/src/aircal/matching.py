"""Pair each reference reading with six windowed sensor readings.

Rules per truth timestamp ``t`` with window ``[t - w/2, t + w/2)``:

* six or more readings: keep the first six by timestamp
* four or five: append copies of their mean until there are six
* three or fewer: drop the truth point
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import EmptyFile, EmptySeries, InvalidWindow, MalformedLine
from .timeseries import Series

N_FEATURES = 6
MIN_PRESENT = 4
MATCHED_HEADER = "epoch_s,f1,f2,f3,f4,f5,f6,label,imputed_count"


@dataclass(frozen=True)
class MatchedSample:
    epoch_s: int
    features: tuple[float, ...]
    label: float
    imputed_count: int

    def __post_init__(self):
        if len(self.features) != N_FEATURES:
            raise ValueError("a matched sample carries exactly six features")
        if self.imputed_count not in (0, 1, 2):
            raise ValueError("imputed_count must be 0, 1 or 2")


@dataclass(frozen=True, eq=False)
class MatchedDataSet:
    """Column-oriented collection of matched samples."""

    epoch_s: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    imputed: np.ndarray
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.epoch_s, dtype=np.int64).reshape(-1)
        x = np.asarray(self.features, dtype=np.float64).reshape(-1, N_FEATURES)
        y = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        k = np.asarray(self.imputed, dtype=np.int64).reshape(-1)
        if not (t.size == x.shape[0] == y.size == k.size):
            raise ValueError("column lengths differ")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("sample timestamps must be strictly increasing")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        for name, arr in (("epoch_s", t), ("features", x), ("labels", y), ("imputed", k)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @classmethod
    def empty(cls, provenance=()) -> "MatchedDataSet":
        return cls(np.zeros(0, np.int64), np.zeros((0, N_FEATURES)), np.zeros(0), np.zeros(0, np.int64), provenance)

    @classmethod
    def from_samples(cls, samples, provenance=()) -> "MatchedDataSet":
        samples = list(samples)
        if not samples:
            return cls.empty(provenance)
        return cls(
            [s.epoch_s for s in samples],
            [s.features for s in samples],
            [s.label for s in samples],
            [s.imputed_count for s in samples],
            provenance,
        )

    def __len__(self) -> int:
        return int(self.epoch_s.size)

    def __iter__(self) -> Iterator[MatchedSample]:
        cols = (self.epoch_s.tolist(), self.features.tolist(), self.labels.tolist(), self.imputed.tolist())
        for t, f, y, k in zip(*cols):
            yield MatchedSample(t, tuple(f), y, k)

    @property
    def samples(self) -> list[MatchedSample]:
        return list(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatchedDataSet):
            return NotImplemented
        return (
            np.array_equal(self.epoch_s, other.epoch_s)
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.imputed, other.imputed)
        )

    def subset(self, index) -> "MatchedDataSet":
        index = np.sort(np.asarray(index, dtype=np.int64))
        return MatchedDataSet(self.epoch_s[index], self.features[index], self.labels[index],
                              self.imputed[index], self.provenance)

    def concat(self, other: "MatchedDataSet") -> "MatchedDataSet":
        return MatchedDataSet(
            np.concatenate([self.epoch_s, other.epoch_s]),
            np.concatenate([self.features, other.features]),
            np.concatenate([self.labels, other.labels]),
            np.concatenate([self.imputed, other.imputed]),
            self.provenance + other.provenance,
        )


def _check(sensor: Series, truth: Series, window_s: int) -> None:
    if len(sensor) == 0 or len(truth) == 0:
        raise EmptySeries("matching needs non-empty sensor and truth series")
    if int(window_s) != window_s or window_s < 2 or window_s % 2:
        raise InvalidWindow(f"window must be an even integer >= 2, got {window_s}")


def match_windows(sensor: Series, truth: Series, window_s: int = 60) -> MatchedDataSet:
    _check(sensor, truth, window_s)
    half = window_s // 2
    st, sv = sensor.epoch_s, sensor.values
    tt, tv = truth.epoch_s, truth.values
    # repeated truth timestamps keep the first occurrence
    first = np.ones(tt.size, dtype=bool)
    first[1:] = tt[1:] != tt[:-1]
    tt, tv = tt[first], tv[first]

    lo = np.searchsorted(st, tt - half, side="left")
    hi = np.searchsorted(st, tt + half, side="left")
    count = hi - lo
    keep = count >= MIN_PRESENT
    lo, count = lo[keep], np.minimum(count[keep], N_FEATURES)
    provenance = (sensor.label, truth.label)
    if lo.size == 0:
        return MatchedDataSet.empty(provenance)

    slots = np.arange(N_FEATURES)
    present = slots[None, :] < count[:, None]
    idx = np.where(present, lo[:, None] + slots[None, :], 0)
    feats = np.where(present, sv[idx], 0.0)
    # left-to-right accumulation, same order as the scalar oracle
    total = np.zeros(feats.shape[0])
    for j in range(N_FEATURES):
        total = total + feats[:, j]
    means = total / count
    feats = np.where(present, feats, means[:, None])
    return MatchedDataSet(tt[keep], feats, tv[keep], N_FEATURES - count, provenance)


def brute_match(sensor: Series, truth: Series, window_s: int) -> MatchedDataSet:
    """Reference implementation: full scan of the sensor stream per truth point."""
    _check(sensor, truth, window_s)
    half = window_s // 2
    s_times = sensor.epoch_s.tolist()
    s_vals = sensor.values.tolist()
    samples = []
    last_t = None
    for t, label in zip(truth.epoch_s.tolist(), truth.values.tolist()):
        if t == last_t:
            continue
        last_t = t
        found = []
        for ts, v in zip(s_times, s_vals):
            if t - half <= ts < t + half:
                found.append(v)
        if len(found) <= 3:
            continue
        if len(found) >= 6:
            samples.append(MatchedSample(t, tuple(found[:6]), label, 0))
        else:
            fill = sum(found) / len(found)
            pad = 6 - len(found)
            samples.append(MatchedSample(t, tuple(found + [fill] * pad), label, pad))
    return MatchedDataSet.from_samples(samples, (sensor.label, truth.label))


def format_matched_csv(ds: MatchedDataSet) -> str:
    rows = [MATCHED_HEADER]
    for t, f, y, k in zip(ds.epoch_s.tolist(), ds.features.tolist(), ds.labels.tolist(), ds.imputed.tolist()):
        rows.append(",".join([str(t), *map(repr, f), repr(y), str(k)]))
    return "\n".join(rows) + "\n"


def parse_matched_csv(text, provenance=()) -> MatchedDataSet:
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise EmptyFile("no header line")
    if lines[0].strip() != MATCHED_HEADER:
        raise MalformedLine(1, f"expected header {MATCHED_HEADER!r}")
    samples = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split(",")
        if len(cols) != 9:
            raise MalformedLine(line_no, "expected 9 columns")
        try:
            samples.append(MatchedSample(int(cols[0]), tuple(float(c) for c in cols[1:7]),
                                         float(cols[7]), int(cols[8])))
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from None
    return MatchedDataSet.from_samples(samples, provenance)
