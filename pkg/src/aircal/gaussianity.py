"""Normality characterisation of matched data slices.

Shapiro-Wilk follows Royston's AS R94 approximation for both the weights and
the p-value. Lilliefors uses the Kolmogorov-Smirnov distance to a normal with
sample mean and standard deviation, with the Dallal-Wilkinson p-value
approximation clamped to the range in which it is reported, [0.001, 0.5].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import AircalError, EmptyInput, TooFewValues, ZeroVariance
from .matching import MatchedDataSet
from .timeseries import slice_equal

SHAPIRO_WILK = "shapiro_wilk"
LILLIEFORS = "lilliefors"
LARGE_N = 5000
LILLIEFORS_P_RANGE = (0.001, 0.5)


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n: int

    def __eq__(self, other):
        return (isinstance(other, Histogram) and self.n == other.n
                and np.array_equal(self.bin_edges, other.bin_edges)
                and np.array_equal(self.counts, other.counts))


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    p_value: float
    n: int
    method: str
    large_n_warning: bool = False


def histogram(values, bins: int) -> Histogram:
    """Equal-width bins over [min, max]; the last bin is closed on both sides.

    A zero-width range is widened to ``[v - 0.5, v + 0.5]``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("histogram of an empty input")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return Histogram(edges, counts.astype(np.int64), int(v.size))


def _prepare(values, minimum: int) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < minimum:
        raise TooFewValues(f"need at least {minimum} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    x = np.sort(x)
    span = x[-1] - x[0]
    if span <= 1e-12 * max(abs(x[0]), abs(x[-1]), 1e-300):
        raise ZeroVariance("all values are (numerically) identical")
    return x


def _poly(coefs, x):
    # coefficients in increasing powers
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


def _shapiro_weights(n: int) -> np.ndarray:
    if n == 3:
        r = math.sqrt(0.5)
        return np.array([-r, 0.0, r])
    i = np.arange(1, n + 1)
    m = ndtri((i - 0.375) / (n + 0.25))
    summ2 = float(m @ m)
    u = 1.0 / math.sqrt(n)
    a = np.empty(n)
    an = m[-1] / math.sqrt(summ2) + _poly([0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], u)
    if n > 5:
        an1 = m[-2] / math.sqrt(summ2) + _poly([0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], u)
        phi = (summ2 - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * an ** 2 - 2 * an1 ** 2)
        a[:] = m / math.sqrt(phi)
        a[-1], a[-2] = an, an1
        a[0], a[1] = -an, -an1
    else:
        phi = (summ2 - 2 * m[-1] ** 2) / (1 - 2 * an ** 2)
        a[:] = m / math.sqrt(phi)
        a[-1], a[0] = an, -an
    return a


def _shapiro_pvalue(w: float, n: int) -> float:
    if w >= 1.0:
        return 1.0
    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return min(max(p, 0.0), 1.0)
    y = math.log1p(-w)
    if n <= 11:
        gamma = 0.459 * n - 2.273
        if y >= gamma:
            return 0.0
        y = -math.log(gamma - y)
        mu = _poly([0.5440, -0.39978, 0.025054, -0.0006714], n)
        sigma = math.exp(_poly([1.3822, -0.77857, 0.062767, -0.0020322], n))
    else:
        ln = math.log(n)
        mu = _poly([-1.5861, -0.31082, -0.083751, 0.0038915], ln)
        sigma = math.exp(_poly([-0.4803, -0.082676, 0.0030302], ln))
    return float(ndtr(-(y - mu) / sigma))


def shapiro_wilk(values) -> NormalityResult:
    x = _prepare(values, 3)
    n = x.size
    a = _shapiro_weights(n)
    # centre and scale first; W is affine invariant
    z = (x - x.mean()) / (x[-1] - x[0])
    ss = float(z @ z)
    w = float(a @ z) ** 2 / ss
    w = min(w, 1.0)
    return NormalityResult(w, _shapiro_pvalue(w, n), n, SHAPIRO_WILK, n > LARGE_N)


def lilliefors_statistic(values) -> float:
    x = _prepare(values, 4)
    return _ks_normal(x)


def _ks_normal(x: np.ndarray) -> float:
    n = x.size
    z = (x - x.mean()) / x.std(ddof=1)
    cdf = ndtr(z)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus))


def dallal_wilkinson_pvalue(d: float, n: int) -> float:
    """Unclamped Dallal-Wilkinson approximation (accurate for p < 0.1)."""
    if n > 100:
        d = d * (n / 100.0) ** 0.49
        n = 100
    return math.exp(-7.01256 * d * d * (n + 2.78019)
                    + 2.99587 * d * math.sqrt(n + 2.78019)
                    - 0.122119 + 0.974598 / math.sqrt(n) + 1.67997 / n)


def lilliefors(values) -> NormalityResult:
    x = _prepare(values, 4)
    d = _ks_normal(x)
    lo, hi = LILLIEFORS_P_RANGE
    p = min(max(dallal_wilkinson_pvalue(d, x.size), lo), hi)
    return NormalityResult(d, p, int(x.size), LILLIEFORS, x.size > LARGE_N)


@dataclass
class SliceCell:
    series: str
    k: int
    slice_index: int
    n: int = 0
    shapiro: NormalityResult | None = None
    lilliefors: NormalityResult | None = None
    histogram: Histogram | None = None
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.errors)


@dataclass
class NormalityReport:
    cells: list[SliceCell]
    bins: int

    def select(self, series: str, k: int) -> list[SliceCell]:
        return [c for c in self.cells if c.series == series and c.k == k]

    def to_csv(self) -> str:
        rows = ["series,k,slice,method,statistic,p_value,n,warning"]
        for c in self.cells:
            for method, res in ((SHAPIRO_WILK, c.shapiro), (LILLIEFORS, c.lilliefors)):
                if res is None:
                    reason = c.errors.get(method) or c.errors.get("slice", "")
                    rows.append(f"{c.series},{c.k},{c.slice_index},{method},,,{c.n},{reason}")
                else:
                    warn = "large_n" if res.large_n_warning else ""
                    rows.append(f"{c.series},{c.k},{c.slice_index},{method},"
                                f"{res.statistic!r},{res.p_value!r},{res.n},{warn}")
        return "\n".join(rows) + "\n"

    def to_text(self) -> str:
        titles = {SHAPIRO_WILK: "Shapiro-Wilk", LILLIEFORS: "Lilliefors"}
        names = {"features": "collected data", "labels": "matched truth data"}
        blocks = []
        for series in ("features", "labels"):
            for method in (SHAPIRO_WILK, LILLIEFORS):
                for k in sorted({c.k for c in self.cells}):
                    cells = self.select(series, k)
                    if not cells:
                        continue
                    lines = [f"{titles[method]} test on {names[series]}, {k} slices",
                             f"{'Slice':<8}{'Statistic':>12}{'P-Value':>12}"]
                    for c in cells:
                        res = c.shapiro if method == SHAPIRO_WILK else c.lilliefors
                        if res is None:
                            reason = c.errors.get(method) or c.errors.get("slice", "failed")
                            lines.append(f"{c.slice_index:<8}{'-':>12}{'-':>12}  ({reason})")
                        else:
                            lines.append(f"{c.slice_index:<8}{res.statistic:>12.3f}{res.p_value:>12.3f}")
                    blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"


def _error_name(exc: Exception) -> str:
    return type(exc).__name__


def _slice_cells(series: str, values: np.ndarray, k: int, bins: int) -> list[SliceCell]:
    try:
        slices = slice_equal(values, k)
    except AircalError as exc:
        return [SliceCell(series, k, i + 1, errors={"slice": _error_name(exc)}) for i in range(k)]
    cells = []
    for i, part in enumerate(slices):
        cell = SliceCell(series, k, i + 1, n=len(part))
        for name, fn in ((SHAPIRO_WILK, shapiro_wilk), (LILLIEFORS, lilliefors)):
            try:
                res = fn(part)
            except AircalError as exc:
                cell.errors[name] = _error_name(exc)
            else:
                setattr(cell, "shapiro" if name == SHAPIRO_WILK else "lilliefors", res)
        cell.histogram = histogram(part, bins)
        cells.append(cell)
    return cells


def normality_report(dataset: MatchedDataSet, bins: int = 50, ks=(2, 4)) -> NormalityReport:
    """Run both tests and a histogram on every equal slice of the flattened
    feature stream (row-major, i.e. time order) and of the label stream."""
    if len(dataset) == 0:
        raise EmptyInput("normality report of an empty data set")
    streams = {"features": dataset.features.reshape(-1), "labels": dataset.labels}
    cells = []
    for series, values in streams.items():
        for k in ks:
            cells.extend(_slice_cells(series, values, k, bins))
    return NormalityReport(cells, bins)
