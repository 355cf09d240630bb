import numpy as np
import pytest

from csfsk.sysmodel import make_config, solve_parameter_for_peak_snr


@pytest.fixture
def ifsk_cfg():
    """The I-FSK link of the B = 20 MHz experiments at 17 dB peak SNR."""
    base = make_config("IFSK", 20e6, 25e-6, 20e-6, 1e-4, 1e4, 1.0, 1)
    return solve_parameter_for_peak_snr(base, 17.0)


@pytest.fixture
def small_ifsk():
    # M = 8, window 5 us
    return make_config("IFSK", 1.6e6, 25e-6, 20e-6, 1e-4, 1e4, 1.0, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20221015)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def report(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def emit(label: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        request.config.stash.setdefault(ACCEPTANCE_LINES, []).append(line)
        with capsys.disabled():
            print("\n" + line)
        assert passed, line

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
