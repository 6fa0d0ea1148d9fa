import sys
from pathlib import Path

import pytest

from mutfl.corpus import FailureSnapshot, KillMatrix, killed_by

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"
GET_TYPE = "com.acme.Foo#getType"
RESOLVE_TYPE = "com.acme.Foo#resolveType"


def toy_matrix() -> KillMatrix:
    """The worked example: two methods, five mutants, four tests."""
    return KillMatrix(
        ["t1", "t2", "t3", "t4"],
        [
            killed_by("m1", GET_TYPE, ["t1", "t2"]),
            killed_by("m2", GET_TYPE, ["t3"]),
            killed_by("m3", GET_TYPE, ["t2", "t3"]),
            killed_by("m5", RESOLVE_TYPE, ["t2"]),
            killed_by("m6", RESOLVE_TYPE, ["t1", "t2", "t3"]),
        ],
    )


def snap(failing, passing=(), covered=None) -> FailureSnapshot:
    return FailureSnapshot(frozenset(failing), frozenset(passing),
                           None if covered is None else frozenset(covered))


@pytest.fixture
def toy():
    return toy_matrix()


@pytest.fixture
def data_dir():
    return DATA


# ---------- acceptance summary ----------

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    failed = report.failed or (report.when == "setup" and report.skipped)
    if report.when == "call" or failed:
        ok = _acceptance.get(name, (True, ""))[0] and not failed
        _acceptance[name] = (ok, item.nodeid if not ok else "")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, where) in _acceptance.items():
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if where:
            line += f"  ({where})"
        terminalreporter.write_line(line)
