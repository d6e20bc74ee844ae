import pytest
from hypothesis import HealthCheck, settings

from mvgegenbauer.params import WeightParams

settings.register_profile(
    "repo", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(params=[(1, 1.0), (2, 0.7), (3, 2.3)], ids=lambda v: f"2l={v[0]}-nu={v[1]}")
def params(request):
    return WeightParams(*request.param)


_ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance():
    """Record one criterion line: ``acceptance(number, title, worst, tol, ok)``."""

    def record(number, title, worst, tol, ok):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} (worst {worst:.3e}, tol {tol:.1e})"
        print(line)
        _ACCEPTANCE_LINES.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
