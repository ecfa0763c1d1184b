import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def pytest_configure(config):
    config._acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(results, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} -- {detail}")


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion outcome and print it."""
    results = request.config._acceptance_results

    def record(number, title, passed, detail=""):
        passed = bool(passed)
        results.append((number, title, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")
        return passed

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)
