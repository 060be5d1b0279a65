"""Shared fixtures and the acceptance summary printed after the run."""

from collections import OrderedDict

import numpy as np
import pytest

_CRITERIA = OrderedDict()
_ITEM_CRITERION = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


def pytest_collection_modifyitems(config, items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is None:
            continue
        number, title = m.args
        _ITEM_CRITERION[item.nodeid] = number
        _CRITERIA.setdefault(number, {"title": title, "outcomes": []})


def pytest_runtest_logreport(report):
    number = _ITEM_CRITERION.get(report.nodeid)
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA[number]["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outs = entry["outcomes"]
        if not outs:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outs):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        n_ok = sum(o == "passed" for o in outs)
        tr.write_line(f"criterion {number:2d} {verdict:7s} {entry['title']} ({n_ok}/{len(outs)} checks)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
