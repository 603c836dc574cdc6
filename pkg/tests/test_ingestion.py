import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aircal.errors import EmptyFile, InvalidValue, MalformedLine, NonIntegerValue
from aircal.ingestion import (DataSetSpan, filter_span, format_sensor_csv, format_truth_csv, parse_sensor_csv,
                              parse_stream, parse_truth_csv)


def test_parse_sensor_examples():
    s = parse_sensor_csv("epoch_s,co2_ppm\n100,410\n110,412")
    assert s.epoch_s.tolist() == [100, 110] and s.values.tolist() == [410.0, 412.0]
    s = parse_sensor_csv(b"epoch_s,co2_ppm\n110,412\n100,410\n")
    assert s.epoch_s.tolist() == [100, 110]
    with pytest.raises(NonIntegerValue) as exc:
        parse_sensor_csv("epoch_s,co2_ppm\n100,41x")
    assert exc.value.line_no == 2


def test_parse_truth_examples():
    s = parse_truth_csv("epoch_s,co2_ppm\n120,417.23")
    assert s.values.tolist() == [417.23]
    with pytest.raises(InvalidValue) as exc:
        parse_truth_csv("epoch_s,co2_ppm\n120,-1.0")
    assert exc.value.line_no == 2
    with pytest.raises(EmptyFile):
        parse_truth_csv("epoch_s,co2_ppm\n")
    with pytest.raises(EmptyFile):
        parse_truth_csv("")


def test_bad_rows_and_header():
    with pytest.raises(MalformedLine):
        parse_sensor_csv("time,value\n1,2")
    with pytest.raises(MalformedLine) as exc:
        parse_sensor_csv("epoch_s,co2_ppm\n1,2\n3")
    assert exc.value.line_no == 3
    with pytest.raises(InvalidValue):
        parse_sensor_csv("epoch_s,co2_ppm\n1,-2")


def test_extra_columns_and_duplicates(caplog):
    text = "epoch_s,co2_ppm,pm25\n10,400,3\n10,401,4\n5,399,1\n"
    with caplog.at_level(logging.WARNING):
        parsed = parse_stream(text, integer_values=True)
    assert parsed.duplicates_dropped == 1
    assert parsed.series.epoch_s.tolist() == [5, 10]
    assert parsed.series.values.tolist() == [399.0, 400.0]
    assert "repeated timestamps" in caplog.text


def test_filter_span():
    s = parse_truth_csv("epoch_s,co2_ppm\n5,1\n15,2\n25,3\n")
    assert filter_span(s, DataSetSpan(1, 10, 25)).epoch_s.tolist() == [15]
    assert filter_span(s, DataSetSpan(1, 0, 100)) == s
    assert len(filter_span(s, DataSetSpan(1, 100, 200))) == 0


def test_span_dates_are_utc():
    span = DataSetSpan.from_dates(1, "09/09/2022", "22/10/2022")
    assert span.start_epoch_s == 1662681600
    assert span.end_epoch_s - span.start_epoch_s == 43 * 86400
    with pytest.raises(ValueError):
        DataSetSpan(1, 10, 10)


rows = st.dictionaries(st.integers(0, 2**40), st.integers(0, 100000), min_size=1, max_size=50)


@given(rows)
def test_sensor_round_trip(d):
    text = "epoch_s,co2_ppm\n" + "".join(f"{t},{v}\n" for t, v in d.items())
    s = parse_sensor_csv(text)
    assert parse_sensor_csv(format_sensor_csv(s)) == s
    assert s.epoch_s.tolist() == sorted(d)


@given(st.dictionaries(st.integers(0, 2**40), st.floats(1e-3, 1e5), min_size=1, max_size=50))
def test_truth_round_trip_is_bit_exact(d):
    s = parse_truth_csv("epoch_s,co2_ppm\n" + "".join(f"{t},{v!r}\n" for t, v in d.items()))
    back = parse_truth_csv(format_truth_csv(s))
    assert np.array_equal(back.values, s.values) and np.array_equal(back.epoch_s, s.epoch_s)


@given(rows, st.integers(0, 2**40), st.integers(1, 2**30))
def test_filter_span_idempotent(d, start, width):
    s = parse_sensor_csv("epoch_s,co2_ppm\n" + "".join(f"{t},{v}\n" for t, v in d.items()))
    span = DataSetSpan(1, start, start + width)
    once = filter_span(s, span)
    assert filter_span(once, span) == once
    assert all(start <= t < start + width for t in once.epoch_s.tolist())
