"""CSV ingestion for sensor and reference streams, and date-span carving."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import EmptyFile, InvalidValue, MalformedLine, NonIntegerValue
from .timeseries import Series

log = logging.getLogger(__name__)

HEADER = "epoch_s,co2_ppm"


@dataclass(frozen=True)
class RawSensorRecord:
    epoch_s: int
    co2_ppm: int

    def check(self, line_no: int = 0) -> None:
        if self.epoch_s < 0:
            raise InvalidValue(line_no, "negative timestamp")
        if self.co2_ppm < 0:
            raise InvalidValue(line_no, "negative concentration")


@dataclass(frozen=True)
class TruthRecord:
    epoch_s: int
    co2_ppm: float

    def check(self, line_no: int = 0) -> None:
        if self.epoch_s < 0:
            raise InvalidValue(line_no, "negative timestamp")
        if not (math.isfinite(self.co2_ppm) and self.co2_ppm > 0):
            raise InvalidValue(line_no, f"concentration must be positive and finite, got {self.co2_ppm}")


@dataclass(frozen=True)
class DataSetSpan:
    id: int
    start_epoch_s: int
    end_epoch_s: int

    def __post_init__(self):
        if not self.start_epoch_s < self.end_epoch_s:
            raise ValueError(f"span {self.id}: start must precede end")

    @classmethod
    def from_dates(cls, id: int, start: str, end: str) -> "DataSetSpan":
        """Build a span from ``dd/mm/yyyy`` dates, read as UTC midnights."""
        return cls(id, _utc_epoch(start), _utc_epoch(end))


def _utc_epoch(date: str) -> int:
    d = datetime.strptime(date.strip(), "%d/%m/%Y").replace(tzinfo=timezone.utc)
    return int(d.timestamp())


@dataclass(frozen=True)
class ParsedStream:
    series: Series
    duplicates_dropped: int


def _decode(text) -> str:
    if isinstance(text, (bytes, bytearray)):
        return bytes(text).decode("utf-8")
    if hasattr(text, "read"):
        return _decode(text.read())
    return text


def parse_stream(text, *, integer_values: bool, label: str = "") -> ParsedStream:
    """Parse ``epoch_s,co2_ppm`` CSV text; extra trailing columns are ignored.

    Rows are sorted by timestamp (stable) and repeated timestamps keep their
    first occurrence in file order.
    """
    lines = _decode(text).splitlines()
    if not lines:
        raise EmptyFile("no header line")
    head = [c.strip() for c in lines[0].lstrip("\ufeff").split(",")]
    if head[:2] != ["epoch_s", "co2_ppm"]:
        raise MalformedLine(1, f"expected header {HEADER!r}")
    record = RawSensorRecord if integer_values else TruthRecord
    times: list[int] = []
    values: list[float] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split(",")
        if len(cols) < 2:
            raise MalformedLine(line_no, "expected at least two columns")
        try:
            t = int(cols[0].strip())
        except ValueError:
            raise MalformedLine(line_no, f"bad timestamp {cols[0]!r}") from None
        raw = cols[1].strip()
        if integer_values:
            try:
                v = int(raw)
            except ValueError:
                raise NonIntegerValue(line_no, f"bad integer {raw!r}") from None
        else:
            try:
                v = float(raw)
            except ValueError:
                raise MalformedLine(line_no, f"bad number {raw!r}") from None
        record(t, v).check(line_no)
        times.append(t)
        values.append(float(v))
    if not times:
        raise EmptyFile("no data rows")
    t_arr = np.asarray(times, dtype=np.int64)
    v_arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(t_arr, kind="stable")
    t_arr, v_arr = t_arr[order], v_arr[order]
    keep = np.ones(t_arr.size, dtype=bool)
    keep[1:] = t_arr[1:] != t_arr[:-1]
    dropped = int(t_arr.size - keep.sum())
    if dropped:
        log.warning("%s: dropped %d rows with repeated timestamps", label or "stream", dropped)
    return ParsedStream(Series(t_arr[keep], v_arr[keep], label), dropped)


def parse_sensor_csv(text, label: str = "sensor") -> Series:
    return parse_stream(text, integer_values=True, label=label).series


def parse_truth_csv(text, label: str = "truth") -> Series:
    return parse_stream(text, integer_values=False, label=label).series


def format_sensor_csv(series: Series) -> str:
    rows = [HEADER]
    rows += [f"{t},{int(round(v))}" for t, v in zip(series.epoch_s.tolist(), series.values.tolist())]
    return "\n".join(rows) + "\n"


def format_truth_csv(series: Series) -> str:
    # repr gives the shortest round-tripping decimal
    rows = [HEADER]
    rows += [f"{t},{v!r}" for t, v in zip(series.epoch_s.tolist(), series.values.tolist())]
    return "\n".join(rows) + "\n"


def filter_span(series: Series, span: DataSetSpan) -> Series:
    """Points with ``start <= t < end``."""
    t = series.epoch_s
    return series.select((t >= span.start_epoch_s) & (t < span.end_epoch_s))
