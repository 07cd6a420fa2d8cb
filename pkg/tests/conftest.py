import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lomac", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lomac")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion and print it."""
    lines = request.config._acceptance_lines

    def report(number: int, title: str, failures: list[str], detail: str = ""):
        status = "PASS" if not failures else "FAIL"
        line = f"[acceptance {number}] {status} {title}" + (f" ({detail})" if detail else "")
        if failures:
            line += ": " + "; ".join(failures)
        lines.append(line)
        print(line)
        assert not failures, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
