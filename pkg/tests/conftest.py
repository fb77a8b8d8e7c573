from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcp.cq import parse_query_pair

settings.register_profile(
    "qcp", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("qcp")

ROOT = Path(__file__).resolve().parents[1]
MOVIE = ROOT / "queries" / "movie.json"


@pytest.fixture
def movie_pair():
    return parse_query_pair(MOVIE.read_bytes())


@pytest.fixture
def movie_path():
    return MOVIE


def random_db(rng: np.random.Generator, schema, constants, max_facts: int = 6):
    """Random instance over ``constants`` (at most ``max_facts`` facts per relation)."""
    from qcp.cq import DatabaseInstance

    facts = {}
    for rel, arity in schema.relations.items():
        count = int(rng.integers(0, max_facts + 1))
        facts[rel] = {
            tuple(constants[int(rng.integers(len(constants)))] for _ in range(arity))
            for _ in range(count)
        }
    return DatabaseInstance(facts)


# --------------------------------------------------------------------------- acceptance report

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcome, duration = _ACCEPTANCE[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {title} ({duration:.2f} s)")
