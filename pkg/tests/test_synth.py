import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aircal.errors import EmptyTruth, InvalidConfig
from aircal.matching import match_windows
from aircal.synth import (DAY_S, Preset, SensorGenConfig, TruthGenConfig, datasheet_sigma, generate,
                          generate_sensor, generate_truth, load_preset, parse_preset, sensor_clean)
from aircal.timeseries import Series


def test_degenerate_truth_is_constant():
    s = generate_truth(TruthGenConfig(diurnal_amplitude_ppm=0, ar1_sigma_ppm=0, n_points=100))
    assert np.all(s.values == 420.0) and np.all(np.diff(s.epoch_s) == 60)


def test_white_noise_variance():
    s = generate_truth(TruthGenConfig(diurnal_amplitude_ppm=0, ar1_phi=0.0, ar1_sigma_ppm=2.0,
                                      n_points=10_000, seed=5))
    assert np.var(s.values - 420.0) == pytest.approx(4.0, rel=0.1)


def test_default_truth_variance_near_target():
    cfg = TruthGenConfig(n_points=43200)
    assert cfg.stationary_variance == pytest.approx(2.85, rel=1e-3)
    v = [np.var(generate_truth(TruthGenConfig(n_points=43200, seed=s)).values, ddof=1) for s in range(8)]
    assert np.mean(v) == pytest.approx(2.85, rel=0.3)


def test_determinism():
    cfg = TruthGenConfig(seed=9)
    assert generate_truth(cfg) == generate_truth(cfg)
    preset = load_preset("default", {"truth.n_points": "600"}).with_seed(4)
    a, b = generate(preset), generate(preset)
    assert a[0] == b[0] and a[1] == b[1]


def test_identity_path_is_quantised_interpolated_truth():
    truth = generate_truth(TruthGenConfig(n_points=200, seed=1))
    sensor = generate_sensor(truth, SensorGenConfig())
    assert np.all(np.diff(sensor.epoch_s) == 10)
    expected = np.rint(np.interp(sensor.epoch_s, truth.epoch_s, truth.values))
    assert np.array_equal(sensor.values, expected)
    raw = generate_sensor(truth, SensorGenConfig(quantize=False))
    assert np.max(np.abs(raw.values - sensor.values)) <= 0.5


def test_identity_path_matches_every_interior_point():
    truth = generate_truth(TruthGenConfig(n_points=120, seed=2))
    sensor = generate_sensor(truth, SensorGenConfig())
    ds = match_windows(sensor, truth)
    interior = truth.epoch_s[1:-1]
    assert set(interior.tolist()) <= set(ds.epoch_s.tolist())
    assert np.all(ds.imputed[1:-1] == 0)
    np.testing.assert_array_equal(ds.labels, truth.values[np.isin(truth.epoch_s, ds.epoch_s)])


def test_linear_drift():
    truth = Series(np.arange(0, 10 * DAY_S + 1, 60), np.full(10 * 1440 + 1, 420.0))
    sensor = generate_sensor(truth, SensorGenConfig(drift_ppm_per_day=1.0, quantize=False))
    t = sensor.epoch_s
    first = sensor.values[t < DAY_S].mean()
    last = sensor.values[t >= 9 * DAY_S].mean()
    assert last - first == pytest.approx(9.0, abs=0.5)


def test_exponential_drift_saturates():
    truth = Series(np.arange(0, 400 * DAY_S, 3600), np.full(400 * 24, 420.0))
    cfg = SensorGenConfig(drift_ppm_per_day=1.0, drift_mode="exponential", drift_tau_days=30.0, quantize=False,
                          interval_s=3600)
    s = generate_sensor(truth, cfg)
    assert s.values[-1] - 420 == pytest.approx(30.0, rel=1e-3)


def test_error_terms():
    truth = Series(np.arange(0, DAY_S + 1, 60), np.full(1441, 400.0))
    ticks = np.arange(0, DAY_S + 1, 10)
    clean = sensor_clean(truth, ticks, SensorGenConfig(gain=1.1, offset_ppm=-5))
    assert np.allclose(clean, 435.0)
    hum = sensor_clean(truth, ticks, SensorGenConfig(humidity_coeff_ppm_per_pct=0.5, humidity_amplitude_pct=10))
    assert hum.max() == pytest.approx(405.0) and hum.min() == pytest.approx(395.0, abs=1e-3)
    temp = sensor_clean(truth, ticks, SensorGenConfig(temp_coeff_per_c=-0.004, temp_diurnal_amplitude_c=5))
    assert temp.min() == pytest.approx(400 * (1 - 0.02), rel=1e-6)


def test_noise_is_datasheet_scaled():
    assert datasheet_sigma(np.array([400.0]))[0] == pytest.approx(70 / 3)
    truth = Series(np.arange(0, 2 * DAY_S, 60), np.full(2 * 1440, 400.0))
    s = generate_sensor(truth, SensorGenConfig(noise_scale=1.0, quantize=False, seed=3))
    assert np.std(s.values) == pytest.approx(70 / 3, rel=0.05)


def test_dropout_and_outages():
    truth = generate_truth(TruthGenConfig(n_points=300))
    assert len(generate_sensor(truth, SensorGenConfig(dropout_prob=1.0))) == 0
    half = generate_sensor(truth, SensorGenConfig(dropout_prob=0.5, seed=1))
    assert 0.4 < len(half) / 1795 < 0.6
    long = generate_truth(TruthGenConfig(n_points=20 * 1440))
    out = generate_sensor(long, SensorGenConfig(outage_rate_per_day=1.0, outage_mean_s=3600, seed=2))
    assert np.max(np.diff(out.epoch_s)) > 600
    with pytest.raises(EmptyTruth):
        generate_sensor(Series(np.array([], dtype=np.int64), np.array([])), SensorGenConfig())


def test_config_validation():
    with pytest.raises(InvalidConfig):
        TruthGenConfig(ar1_phi=1.0).validate()
    with pytest.raises(InvalidConfig):
        SensorGenConfig(dropout_prob=1.5).validate()
    with pytest.raises(InvalidConfig):
        SensorGenConfig(drift_mode="cubic").validate()


def test_preset_parsing():
    p = parse_preset("[truth]\nn_points = 10\n[sensor]\nquantize = no\noffset_ppm = -3\n[spans]\na = 0, 1\nb = 1, 2.5\n",
                     {"sensor.gain": "1.2"})
    assert p.truth.n_points == 10 and p.sensor.quantize is False and p.sensor.gain == 1.2
    assert p.span_names == ("a", "b") and p.spans[1].end_epoch_s - p.spans[1].start_epoch_s == int(1.5 * DAY_S)
    assert p.with_seed(5).truth.seed == 5 and p.with_seed(5).sensor.seed == 6
    for bad in ("[truth]\nbogus = 1\n", "[weather]\nx = 1\n", "[truth]\nn_points = ten\n",
                "[spans]\na = 1\n", "no section"):
        with pytest.raises(InvalidConfig):
            parse_preset(bad)
    with pytest.raises(InvalidConfig):
        parse_preset("", {"gain": "2"})
    with pytest.raises(InvalidConfig):
        load_preset("no-such-preset")


def test_bundled_presets_load():
    d = load_preset("default")
    assert d.sensor.offset_ppm == -40 and d.sensor.drift_ppm_per_day == 1.0 and d.sensor.noise_scale == 1.0
    assert d.truth.n_points * d.truth.interval_s == 30 * DAY_S
    drift = load_preset("drift")
    assert len(drift.spans) == 3 and drift.span_names == ("early", "middle", "late")
    assert isinstance(Preset(), Preset)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.5, 1.5), st.floats(-50, 50))
def test_quantisation_bound_without_noise(seed, gain, offset):
    truth = generate_truth(TruthGenConfig(n_points=30, seed=seed))
    cfg = SensorGenConfig(gain=gain, offset_ppm=offset)
    exact = sensor_clean(truth, np.arange(truth.epoch_s[0], truth.epoch_s[-1] + 1, 10), cfg)
    emitted = generate_sensor(truth, cfg).values
    assert np.max(np.abs(exact - emitted)) <= 0.5
