import collections

import numpy as np
import pytest

from attrition.config import default_config
from attrition.datasets import load_ibm_hr
from attrition.experiment import run_experiment

_criteria = collections.OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    num, title = marker
    entry = _criteria.setdefault(num, {"title": title, "passed": True, "seen": False})
    if report.when == "call" or report.outcome != "passed":
        entry["seen"] = True
        if report.outcome != "passed":
            entry["passed"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        e = _criteria[num]
        status = "PASS" if e["passed"] and e["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {e['title']}")


@pytest.fixture(scope="session")
def ibm():
    return load_ibm_hr()


@pytest.fixture(scope="session")
def default_cfg():
    return default_config()


@pytest.fixture(scope="session")
def default_run(tmp_path_factory, default_cfg):
    """One full default experiment shared by every test that only reads its outputs."""
    out = tmp_path_factory.mktemp("run_default")
    manifest = run_experiment(default_cfg, out)
    return out, manifest


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
