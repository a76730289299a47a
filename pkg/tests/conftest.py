import os

import pytest
from hypothesis import HealthCheck, settings

from tests.helpers import complete

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def k7():
    return complete(7)


_CRITERIA: dict[str, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if rep.passed and not hasattr(rep, "wasxfail"):
            verdict = "PASS"
        elif hasattr(rep, "wasxfail"):
            verdict = f"FAIL (known: {rep.wasxfail})"
        elif rep.skipped:
            verdict = "SKIP"
        else:
            verdict = "FAIL"
        _CRITERIA.setdefault(mark.args[0], []).append((item.name, verdict))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda x: int(x.split()[0])):
        runs = _CRITERIA[label]
        bad = [f"{name}: {verdict}" for name, verdict in runs if verdict != "PASS"]
        head = "PASS" if not bad else "FAIL"
        detail = f"{len(runs)} check(s)" if not bad else "; ".join(bad)
        terminalreporter.write_line(f"criterion {label}: {head} ({detail})")
