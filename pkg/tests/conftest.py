import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def child_cmd():
    def make(mode=""):
        cmd = [sys.executable, str(DATA / "child_quadratic.py")]
        return cmd + [mode] if mode else cmd
    return make


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    passed = call.excinfo is None
    detail = dict(item.user_properties).get("detail", "")
    if not passed:
        detail = call.excinfo.exconly().splitlines()[0][:200]
    item.config._criteria[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(crit):
        title, passed, detail = crit[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}: {title}" + (f" ({detail})" if detail else ""))
