from __future__ import annotations

from pathlib import Path

import pytest

from malont_kg.ontology import builtin_malont
from malont_kg.pipeline import build

HERE = Path(__file__).parent
FIXTURE_A = HERE / "fixtures" / "fixture_a"
QUERIES = HERE / "fixtures" / "queries"
GOLDEN = HERE / "fixtures" / "golden"

_criteria: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    previous = _criteria.get(number, (title, True))[1]
    if report.when == "call" or report.failed:
        _criteria[number] = (title, previous and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def ontology():
    return builtin_malont()


@pytest.fixture(scope="session")
def fixture_a(ontology):
    store, summary = build(ontology, FIXTURE_A)
    return store, summary


def competency_query(n: int) -> str:
    return (QUERIES / f"cq{n}.rq").read_text(encoding="utf-8")
