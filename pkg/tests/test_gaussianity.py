import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from aircal.errors import EmptyInput, TooFewValues, ZeroVariance
from aircal.gaussianity import (dallal_wilkinson_pvalue, histogram, lilliefors, lilliefors_statistic,
                                normality_report, shapiro_wilk)
from aircal.matching import MatchedDataSet


def test_histogram_examples():
    h = histogram([0, 1, 2, 3], 2)
    assert h.bin_edges.tolist() == [0, 1.5, 3] and h.counts.tolist() == [2, 2] and h.n == 4
    h = histogram([5, 5, 5], 3)
    assert h.bin_edges[0] == 4.5 and h.bin_edges[-1] == 5.5 and h.counts.tolist() == [0, 3, 0]
    with pytest.raises(EmptyInput):
        histogram([], 3)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.integers(1, 20), st.randoms())
def test_histogram_permutation_invariant(values, bins, rnd):
    h = histogram(values, bins)
    assert h.counts.sum() == len(values) and np.all(np.diff(h.bin_edges) > 0)
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert histogram(shuffled, bins) == h


def test_shapiro_closed_form_and_errors():
    assert shapiro_wilk([1, 2, 3]).statistic == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(TooFewValues):
        shapiro_wilk([1, 2])
    with pytest.raises(ZeroVariance):
        shapiro_wilk([3, 3, 3, 3])


@pytest.mark.filterwarnings("ignore:scipy.stats.shapiro")
@pytest.mark.parametrize("n", [3, 4, 5, 7, 11, 12, 20, 50, 200, 1000, 6000])
def test_shapiro_matches_reference(n):
    rng = np.random.default_rng(n)
    for x in (rng.normal(size=n), rng.exponential(size=n), rng.uniform(size=n)):
        ours = shapiro_wilk(x)
        ref = stats.shapiro(x)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)
        assert ours.large_n_warning == (n > 5000)


def test_lilliefors_examples():
    res = lilliefors([0.0] * 25 + [1.0] * 25)
    assert res.p_value == 0.001
    assert res.statistic == pytest.approx(0.33895, abs=1e-4)
    n = 100
    q = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n, loc=3, scale=2)
    assert lilliefors_statistic(q) < 0.01
    with pytest.raises(TooFewValues):
        lilliefors([1, 2, 3])


def test_lilliefors_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.stats.diagnostic")
    rng = np.random.default_rng(0)
    for n in (20, 50, 150, 1000):
        for x in (rng.normal(size=n), rng.exponential(size=n), rng.standard_t(3, size=n)):
            d, p = sm.lilliefors(x, dist="norm", pvalmethod="approx")
            ours = lilliefors(x)
            assert ours.statistic == pytest.approx(d, abs=1e-12)
            if p < 0.1:
                assert ours.p_value == pytest.approx(min(max(p, 0.001), 0.5), rel=1e-6)


def test_dallal_wilkinson_is_monotone():
    ds = np.linspace(0.1, 0.4, 20)
    ps = [dallal_wilkinson_pvalue(d, 50) for d in ds]
    assert all(a > b for a, b in zip(ps, ps[1:]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-1e3, 1e3))
def test_affine_invariance(seed, a, b):
    x = np.random.default_rng(seed).normal(size=40)
    w0, w1 = shapiro_wilk(x).statistic, shapiro_wilk(a * x + b).statistic
    assert abs(w0 - w1) < 1e-9
    assert abs(lilliefors_statistic(x) - lilliefors_statistic(a * x + b)) < 1e-9


def _dataset(labels, features=None):
    n = len(labels)
    if features is None:
        features = np.random.default_rng(3).normal(400, 20, (n, 6))
    return MatchedDataSet(np.arange(n) * 60, features, labels, np.zeros(n, dtype=int))


def test_report_structure_and_determinism():
    labels = np.random.default_rng(4).normal(420, 1.7, 400)
    ds = _dataset(labels)
    rep = normality_report(ds, bins=20)
    assert len(rep.select("labels", 2)) == 2 and len(rep.select("labels", 4)) == 4
    assert len(rep.select("features", 2)) == 2 and len(rep.select("features", 4)) == 4
    assert rep.select("features", 2)[0].n == 1200
    assert all(c.histogram.counts.sum() == c.n for c in rep.cells)
    assert rep.to_csv() == normality_report(ds, bins=20).to_csv()
    assert rep.to_csv().splitlines()[0] == "series,k,slice,method,statistic,p_value,n,warning"
    assert "Shapiro-Wilk test on matched truth data, 2 slices" in rep.to_text()


def test_report_flags_failed_cells_without_aborting():
    ds = _dataset([420.0, 421.0, 419.0])
    rep = normality_report(ds)
    k4 = rep.select("labels", 4)
    assert len(k4) == 4 and all(c.errors == {"slice": "TooFewValues"} for c in k4)
    k2 = rep.select("labels", 2)
    # slices of 2 and 1 values: too short for either test, still reported
    assert all(c.failed for c in k2) and k2[0].histogram is not None
    feats = rep.select("features", 4)
    assert all(not c.failed for c in feats)
    assert "TooFewValues" in rep.to_csv()
    with pytest.raises(EmptyInput):
        normality_report(MatchedDataSet.empty())
