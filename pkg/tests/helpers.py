"""Shared random-instance builders for the test suite."""
import numpy as np

from aircal.matching import MatchedDataSet
from aircal.timeseries import Series


def random_streams(rng: np.random.Generator, n_truth: int | None = None):
    """Jittered sensor/truth streams with gaps, dropouts and duplicate stamps.

    The sensor cadence varies per instance (7-12 s) so windows see anything
    from zero to more than six readings.
    """
    n_truth = n_truth or int(rng.integers(5, 40))
    t0 = int(rng.integers(0, 10_000))
    truth_t = t0 + 60 * np.arange(n_truth) + rng.integers(-5, 6, n_truth)
    truth_t = np.sort(truth_t)
    if rng.random() < 0.5 and n_truth > 2:
        # repeated truth stamps
        k = int(rng.integers(1, n_truth))
        truth_t[k] = truth_t[k - 1]
    truth_v = 420 + rng.normal(0, 2, n_truth)

    cadence = float(rng.choice([7.0, 8.0, 10.0, 12.0]))
    span = truth_t[-1] - truth_t[0] + 120
    n_s = int(span / cadence) + 1
    sensor_t = np.floor(truth_t[0] - 60 + cadence * np.arange(n_s) + rng.uniform(-2, 2, n_s)).astype(np.int64)
    sensor_t = np.sort(np.maximum(sensor_t, 0))
    keep = rng.random(n_s) >= rng.uniform(0.0, 0.4)
    for _ in range(int(rng.integers(0, 3))):
        g0 = rng.integers(truth_t[0] - 60, truth_t[-1] + 60)
        keep &= ~((sensor_t >= g0) & (sensor_t < g0 + rng.integers(30, 300)))
    sensor_t = sensor_t[keep]
    if sensor_t.size == 0:
        sensor_t = np.array([truth_t[0]])
    sensor_v = rng.integers(300, 500, sensor_t.size).astype(np.float64)
    return Series(sensor_t, sensor_v, "sensor"), Series(truth_t, truth_v, "truth")


def window_counts(sensor: Series, truth: Series, window_s: int = 60) -> list[int]:
    half = window_s // 2
    t = np.unique(truth.epoch_s)
    return [int(np.count_nonzero((sensor.epoch_s >= x - half) & (sensor.epoch_s < x + half))) for x in t]


def make_dataset(features, labels, start=0, step=60) -> MatchedDataSet:
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    return MatchedDataSet(start + step * np.arange(n), features, labels, np.zeros(n, dtype=np.int64))
