import numpy as np
import pytest

from helpers import make_dataset
from aircal.timeseries import Series

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    prev = _ACCEPTANCE.get(number, (title, "PASS"))[1]
    if rep.failed or (rep.skipped and prev == "PASS"):
        _ACCEPTANCE[number] = (title, "FAIL" if rep.failed else "SKIP")
    elif rep.when == "call":
        _ACCEPTANCE.setdefault(number, (title, "PASS"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"AC{number} {status}: {title}")


@pytest.fixture
def linear_set():
    """Features uniform in [400, 440], label the row mean."""
    rng = np.random.default_rng(7)
    X = rng.uniform(400, 440, (2000, 6))
    return make_dataset(X, X.mean(axis=1))


@pytest.fixture
def series_factory():
    def make(times, values, label=""):
        return Series(np.asarray(times, dtype=np.int64), np.asarray(values, dtype=np.float64), label)
    return make
