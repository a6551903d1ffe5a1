import numpy as np
import pytest

from eitgate.presets import preset_6p32, preset_7p12

_acceptance_lines = []


@pytest.fixture(scope="session")
def table_preset():
    return preset_6p32()


@pytest.fixture(scope="session")
def fast_preset():
    return preset_7p12()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def criterion():
    """Record one acceptance pass/fail line, then assert it."""

    def record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        line = f"{status} criterion {number}: {detail}"
        _acceptance_lines.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
