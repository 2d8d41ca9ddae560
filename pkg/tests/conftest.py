import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from j2theory.elements import EARTH, KeplerianSet, delaunay_from_keplerian

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


TOPEX = KeplerianSet(7707.270, 1e-4, np.radians(66.04), np.radians(180.001),
                     np.radians(270.0), np.radians(180.0))


@pytest.fixture
def topex():
    return delaunay_from_keplerian(TOPEX, EARTH.mu)


@pytest.fixture
def generic_state():
    """A moderately eccentric, inclined orbit well away from every guard band."""
    from j2theory.elements import DelaunayState

    L = np.sqrt(EARTH.mu * 9000.0)
    G = L * np.sqrt(1 - 0.2**2)
    return DelaunayState(1.0, 0.7, 0.3, L, G, G * np.cos(0.9))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ---------------------------------------------------------------
# Each acceptance test records (criterion, passed, detail); the terminal summary
# prints one PASS/FAIL line per criterion, failing if any of its parts failed.

ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


@pytest.fixture
def acceptance():
    def record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, parts in ACCEPTANCE.items():
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
