"""Synthetic reference and low-cost NDIR sensor streams.

The reference stream is a baseline plus a daily cycle, optional seasonal cycle
and trend, and AR(1) weather noise on a one-minute grid. The sensor stream
samples it every ten seconds through a gain/offset, a slowly drifting baseline,
gas-density effects of temperature and pressure, a humidity cross-sensitivity,
datasheet-level Gaussian noise and integer quantisation, and then loses
readings to random dropouts and power outages.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import EmptyTruth, InvalidConfig
from .ingestion import DataSetSpan
from .timeseries import Series

DAY_S = 86400
YEAR_DAYS = 365.25
# 09/09/2022 00:00 UTC
DEFAULT_START = 1662681600


@dataclass(frozen=True)
class TruthGenConfig:
    baseline_ppm: float = 420.0
    diurnal_amplitude_ppm: float = 1.0
    diurnal_peak_hour: float = 14.0
    ar1_phi: float = 0.99
    # amplitude^2/2 + sigma^2/(1-phi^2) = 0.5 + 2.35 = 2.85 ppm^2
    ar1_sigma_ppm: float = 0.21625
    trend_ppm_per_year: float = 0.0
    seasonal_amplitude_ppm: float = 0.0
    seasonal_peak_day: float = 0.0
    interval_s: int = 60
    n_points: int = 1440
    start_epoch_s: int = DEFAULT_START
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.ar1_phi < 1.0:
            raise InvalidConfig("ar1_phi must lie in [0, 1)")
        if self.ar1_sigma_ppm < 0 or self.diurnal_amplitude_ppm < 0:
            raise InvalidConfig("amplitudes must be non-negative")
        if self.interval_s < 1 or self.n_points < 1:
            raise InvalidConfig("interval_s and n_points must be >= 1")
        if self.start_epoch_s < 0:
            raise InvalidConfig("start_epoch_s must be >= 0")

    @property
    def stationary_variance(self) -> float:
        return self.diurnal_amplitude_ppm ** 2 / 2 + self.ar1_sigma_ppm ** 2 / (1 - self.ar1_phi ** 2)


@dataclass(frozen=True)
class SensorGenConfig:
    gain: float = 1.0
    offset_ppm: float = 0.0
    drift_ppm_per_day: float = 0.0
    drift_mode: str = "linear"
    drift_tau_days: float = 60.0
    temp_coeff_per_c: float = 0.0
    temp_ref_c: float = 20.0
    temp_mean_c: float = 20.0
    temp_diurnal_amplitude_c: float = 0.0
    temp_peak_hour: float = 14.0
    pressure_amplitude: float = 0.0
    pressure_period_days: float = 4.0
    humidity_coeff_ppm_per_pct: float = 0.0
    humidity_ref_pct: float = 70.0
    humidity_mean_pct: float = 70.0
    humidity_amplitude_pct: float = 0.0
    humidity_peak_hour: float = 4.0
    noise_scale: float = 0.0
    quantize: bool = True
    interval_s: int = 10
    dropout_prob: float = 0.0
    outage_rate_per_day: float = 0.0
    outage_mean_s: float = 3600.0
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise InvalidConfig("dropout_prob must lie in [0, 1]")
        if self.interval_s < 1:
            raise InvalidConfig("interval_s must be >= 1")
        if self.drift_mode not in ("linear", "exponential"):
            raise InvalidConfig(f"unknown drift_mode {self.drift_mode!r}")
        if self.drift_mode == "exponential" and self.drift_tau_days <= 0:
            raise InvalidConfig("drift_tau_days must be positive")
        if self.noise_scale < 0 or self.outage_rate_per_day < 0 or self.outage_mean_s <= 0:
            raise InvalidConfig("noise_scale, outage rate and outage length must be non-negative")
        if self.pressure_period_days <= 0:
            raise InvalidConfig("pressure_period_days must be positive")


def _hour_cycle(t: np.ndarray, peak_hour: float) -> np.ndarray:
    hours = (t % DAY_S) / 3600.0
    return np.cos(2 * math.pi * (hours - peak_hour) / 24.0)


def generate_truth(config: TruthGenConfig) -> Series:
    config.validate()
    rng = np.random.default_rng(config.seed)
    t = config.start_epoch_s + config.interval_s * np.arange(config.n_points, dtype=np.int64)
    days = (t - config.start_epoch_s) / DAY_S
    phi, sigma = config.ar1_phi, config.ar1_sigma_ppm
    eps = rng.standard_normal(config.n_points)
    x0 = eps[0] * sigma / math.sqrt(1 - phi * phi)
    noise = lfilter([1.0], [1.0, -phi], sigma * eps[1:], zi=[phi * x0])[0]
    noise = np.concatenate([[x0], noise])
    v = (config.baseline_ppm
         + config.diurnal_amplitude_ppm * _hour_cycle(t, config.diurnal_peak_hour)
         + config.trend_ppm_per_year * days / YEAR_DAYS
         + config.seasonal_amplitude_ppm * np.cos(2 * math.pi * (days - config.seasonal_peak_day) / YEAR_DAYS)
         + noise)
    return Series(t, v, "truth")


def sensor_drift(days: np.ndarray, config: SensorGenConfig) -> np.ndarray:
    if config.drift_mode == "linear":
        return config.drift_ppm_per_day * days
    tau = config.drift_tau_days
    return config.drift_ppm_per_day * tau * (1.0 - np.exp(-days / tau))


def sensor_clean(truth: Series, ticks: np.ndarray, config: SensorGenConfig) -> np.ndarray:
    """Noise-free, unquantised sensor response at the given tick times."""
    days = (ticks - truth.epoch_s[0]) / DAY_S
    gas = config.gain * np.interp(ticks, truth.epoch_s, truth.values)
    temp = config.temp_mean_c + config.temp_diurnal_amplitude_c * _hour_cycle(ticks, config.temp_peak_hour)
    pressure_ratio = 1.0 + config.pressure_amplitude * np.sin(2 * math.pi * days / config.pressure_period_days)
    humidity = config.humidity_mean_pct + config.humidity_amplitude_pct * _hour_cycle(ticks, config.humidity_peak_hour)
    density = pressure_ratio * (1.0 + config.temp_coeff_per_c * (temp - config.temp_ref_c))
    return (gas * density
            + config.humidity_coeff_ppm_per_pct * (humidity - config.humidity_ref_pct)
            + config.offset_ppm
            + sensor_drift(days, config))


def datasheet_sigma(reading: np.ndarray) -> np.ndarray:
    """One third of the +-(50 ppm + 5% of reading) accuracy band."""
    return (50.0 + 0.05 * np.abs(reading)) / 3.0


def generate_sensor(truth: Series, config: SensorGenConfig) -> Series:
    config.validate()
    if len(truth) == 0:
        raise EmptyTruth("sensor generation needs a non-empty truth series")
    rng = np.random.default_rng(config.seed)
    t0, t1 = int(truth.epoch_s[0]), int(truth.epoch_s[-1])
    ticks = np.arange(t0, t1 + 1, config.interval_s, dtype=np.int64)
    clean = sensor_clean(truth, ticks, config)
    noise = rng.standard_normal(ticks.size) * config.noise_scale * datasheet_sigma(clean)
    reading = clean + noise
    if config.quantize:
        reading = np.maximum(np.rint(reading), 0.0)
    keep = rng.random(ticks.size) >= config.dropout_prob
    span_days = (t1 - t0) / DAY_S
    n_out = rng.poisson(config.outage_rate_per_day * span_days) if config.outage_rate_per_day > 0 else 0
    starts = rng.uniform(t0, t1, n_out)
    lengths = rng.exponential(config.outage_mean_s, n_out)
    for s, ln in zip(starts, lengths):
        keep &= ~((ticks >= s) & (ticks < s + ln))
    return Series(ticks[keep], reading[keep], "sensor")


@dataclass(frozen=True)
class Preset:
    truth: TruthGenConfig = field(default_factory=TruthGenConfig)
    sensor: SensorGenConfig = field(default_factory=SensorGenConfig)
    spans: tuple[DataSetSpan, ...] = ()
    span_names: tuple[str, ...] = ()

    def with_seed(self, seed: int) -> "Preset":
        """Fan one seed out to the truth and sensor generators."""
        return replace(self, truth=replace(self.truth, seed=seed), sensor=replace(self.sensor, seed=seed + 1))


def _coerce(cls, key: str, raw: str):
    types = {f.name: f.type for f in fields(cls)}
    if key not in types:
        raise InvalidConfig(f"unknown {cls.__name__} key {key!r}")
    kind = types[key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw.strip()
    except ValueError:
        raise InvalidConfig(f"bad value for {key}: {raw!r}") from None


def _build(cls, values: dict):
    return cls(**{k: _coerce(cls, k, v) for k, v in values.items()})


def parse_preset(text: str, overrides: dict[str, str] | None = None) -> Preset:
    """Parse a ``key = value`` preset with ``[truth]``, ``[sensor]`` and optional
    ``[spans]`` sections. Overrides are ``section.key -> value``.

    Span lines read ``name = start_day, end_day`` relative to the truth start.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidConfig(str(exc)) from None
    sections = {name: dict(cp[name]) for name in cp.sections()}
    for key, value in (overrides or {}).items():
        if "." not in key:
            raise InvalidConfig(f"override {key!r} must look like section.key")
        sec, name = key.split(".", 1)
        sections.setdefault(sec, {})[name] = value
    unknown = set(sections) - {"truth", "sensor", "spans"}
    if unknown:
        raise InvalidConfig(f"unknown preset sections: {sorted(unknown)}")
    truth = _build(TruthGenConfig, sections.get("truth", {}))
    sensor = _build(SensorGenConfig, sections.get("sensor", {}))
    truth.validate()
    sensor.validate()
    spans, names = [], []
    for i, (name, raw) in enumerate(sections.get("spans", {}).items(), start=1):
        try:
            a, b = (float(x) for x in raw.split(","))
            spans.append(DataSetSpan(i, truth.start_epoch_s + int(round(a * DAY_S)),
                                     truth.start_epoch_s + int(round(b * DAY_S))))
        except ValueError:
            raise InvalidConfig(f"bad span {name!r}: {raw!r}") from None
        names.append(name)
    return Preset(truth, sensor, tuple(spans), tuple(names))


def load_preset(source: str | Path, overrides: dict[str, str] | None = None) -> Preset:
    """Load a preset from a file path or a bundled preset name (``default``, ``drift``)."""
    path = Path(source)
    if path.is_file():
        return parse_preset(path.read_text(encoding="utf-8"), overrides)
    bundled = resources.files("aircal.presets") / f"{source}.ini"
    if bundled.is_file():
        return parse_preset(bundled.read_text(encoding="utf-8"), overrides)
    raise InvalidConfig(f"no preset file or bundled preset named {str(source)!r}")


def generate(preset: Preset) -> tuple[Series, Series]:
    truth = generate_truth(preset.truth)
    return truth, generate_sensor(truth, preset.sensor)
