import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mvsteg.yuv_io import generate_synthetic

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def pan_video():
    return generate_synthetic(64, 64, 8, "global-pan", seed=3, pan=(1, 0), noise=1)


@pytest.fixture(scope="session")
def object_video():
    return generate_synthetic(64, 64, 8, "multi-object", seed=5, noise=1)


@pytest.fixture(scope="session")
def static_video():
    return generate_synthetic(64, 64, 8, "static+noise", seed=9)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria: one PASS/FAIL line per criterion in the terminal summary

def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    n, title = mark.args
    entry = item.config._acceptance.setdefault(n, {"title": title, "ok": True, "details": []})
    entry["ok"] &= rep.passed
    entry["details"] += [v for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        r = results[n]
        line = f"criterion {n:>2}: {'PASS' if r['ok'] else 'FAIL'}  {r['title']}"
        if r["details"]:
            line += "  [" + "; ".join(r["details"]) + "]"
        terminalreporter.write_line(line)
