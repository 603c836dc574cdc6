import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aircal.errors import EmptySeries, LengthMismatch, TooFewValues
from aircal.timeseries import Series, TimePoint, align_truncate, covariance2, slice_equal, summary

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_series_is_sorted_and_read_only():
    s = Series(np.array([1, 2, 3]), np.array([4.0, 5.0, 6.0]), "x")
    assert len(s) == 3
    assert s.points[1] == TimePoint(2, 5.0)
    with pytest.raises(ValueError):
        s.values[0] = 1.0
    with pytest.raises(ValueError):
        Series(np.array([2, 1]), np.array([1.0, 2.0]))


def test_summary_matches_numpy():
    v = [1.0, 2.0, 4.0, 8.0]
    s = summary(v)
    assert s.n == 4 and s.min == 1.0 and s.max == 8.0
    assert s.mean == pytest.approx(3.75)
    assert s.std == pytest.approx(np.std(v, ddof=1))
    with pytest.raises(EmptySeries):
        summary([])


def test_slice_equal_examples():
    assert [len(p) for p in slice_equal(list(range(8)), 2)] == [4, 4]
    assert [len(p) for p in slice_equal(list(range(10)), 4)] == [3, 3, 2, 2]
    with pytest.raises(TooFewValues):
        slice_equal([1, 2, 3], 4)


@given(st.lists(finite, min_size=1, max_size=60), st.integers(1, 8))
def test_slice_equal_concatenates_back(values, k):
    if len(values) < k:
        with pytest.raises(TooFewValues):
            slice_equal(values, k)
        return
    parts = slice_equal(values, k)
    assert len(parts) == k
    assert [x for p in parts for x in p] == values
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 1 and sizes == sorted(sizes, reverse=True)


def test_align_truncate():
    a, b = align_truncate([1, 2, 3, 4, 5], [7, 8, 9])
    assert a == [1, 2, 3] and b == [7, 8, 9]
    assert align_truncate([1, 2], [3, 4]) == ([1, 2], [3, 4])
    with pytest.raises(EmptySeries):
        align_truncate([], [1])


def test_covariance2_examples():
    assert covariance2([1, 2, 3], [1, 2, 3]).array.tolist() == [[1.0, 1.0], [1.0, 1.0]]
    c = covariance2([1, 2, 3], [7, 7, 7]).array
    assert c[0, 1] == 0.0 and c[1, 1] == 0.0
    with pytest.raises(LengthMismatch):
        covariance2([1, 2], [1])
    with pytest.raises(TooFewValues):
        covariance2([1], [1])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=40),
       st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_covariance2_properties(pairs, ca, cb):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    m = covariance2(a, b).array
    assert m[0, 1] == m[1, 0]
    np.testing.assert_allclose(m, np.cov(a, b), rtol=1e-9, atol=1e-9)
    shifted = covariance2(a + ca, b + cb).array
    np.testing.assert_allclose(shifted, m, rtol=1e-9, atol=1e-6)
    self_cov = covariance2(a, a).array
    assert np.all(self_cov == self_cov[0, 0])


def test_covariance_format_is_two_bracketed_rows():
    text = covariance2([1.0, 2.0, 4.0], [2.0, 1.0, 0.0]).format(4)
    lines = text.splitlines()
    assert len(lines) == 2 and all(l.startswith("[ ") and l.endswith(" ]") for l in lines)
