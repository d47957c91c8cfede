import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sgpressure import SetSample, cantor_k1, doubling_pair, heterogeneous_pair

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def doubling():
    return doubling_pair()


@pytest.fixture(scope="session")
def hetero():
    return heterogeneous_pair()


@pytest.fixture(scope="session")
def cantor():
    return cantor_k1()


@pytest.fixture(scope="session")
def grid4096():
    return SetSample.grid(4096)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str) -> bool:
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[criterion] = line
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
