from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acas.mtourism.runtime import DemoRuntime, data_path, load_demo_model  # noqa: E402
from acas.mtourism.service import load_restaurants  # noqa: E402


@pytest.fixture(scope="session")
def demo_model():
    return load_demo_model()


@pytest.fixture(scope="session")
def restaurants():
    return load_restaurants(data_path("restaurants.json"))


@pytest.fixture
def runtime(restaurants):
    return DemoRuntime(restaurants)


_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance):
        terminalreporter.write_line(f"{outcome}  {name}")
