import pytest
from hypothesis import settings

from mminf_switching.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

EXAMPLE = ModelParams(lam=2.0, mu=1.0, h=1.0, c=100.0, s0=100.0, s1=100.0)


@pytest.fixture
def example():
    return EXAMPLE


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE]

    def log(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
