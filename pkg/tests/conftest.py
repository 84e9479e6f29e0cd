from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from crlab import build_model, group3d, heisenberg, sphere

settings.register_profile(
    "crlab", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("crlab")

SPECS = {
    "heisenberg(1)": heisenberg(1),
    "heisenberg(2)": heisenberg(2),
    "sphere(1)": sphere(1),
    "sphere(2)": sphere(2),
    "group3d(2,1)": group3d(2, 1),
    "group3d(2,2)": group3d(2, 2),
}


@lru_cache(maxsize=None)
def model(label: str):
    return build_model(SPECS[label])


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}"
        if detail:
            line += f" ({detail})"
        print(line)
        _ACCEPTANCE.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
