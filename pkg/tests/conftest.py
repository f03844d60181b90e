import json
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def frozen():
    return json.loads((TESTS / "data" / "frozen.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance summary: one PASS/FAIL line per criterion

_ACCEPTANCE: dict[str, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in getattr(report, "acceptance_ids", ()):
        _ACCEPTANCE.setdefault(mark, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.acceptance_ids = [m.args[0] for m in item.iter_markers("acceptance")]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id): acceptance criterion this test decides")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda s: int(s.split("-")[1])):
        verdict = "PASS" if all(_ACCEPTANCE[key]) else "FAIL"
        terminalreporter.write_line(f"{key} {verdict}")
