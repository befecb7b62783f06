import math

import numpy as np
import pytest

from psdgroth import matrix as mx

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _CRITERIA.get(report.nodeid)
    if marker is None:
        return
    num, title = marker
    _CRITERIA[report.nodeid] = (num, title, report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    rows = [v for v in _CRITERIA.values() if len(v) == 3]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, outcome in sorted(rows, key=lambda r: r[0]):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {title}")


@pytest.fixture
def c5():
    return mx.laplacian(mx.cycle_graph(5))


C5_VALUE = 10 * (1 + math.cos(math.pi / 5))


def random_unit_vectors(count, dim, rng):
    V = rng.standard_normal((count, dim))
    return V / np.linalg.norm(V, axis=1)[:, None]
