import numpy as np
import pytest
from hypothesis import settings

from qpronto import SampledSignal, solve
from qpronto.config import load_preset

settings.register_profile("qpronto", deadline=None, max_examples=40)
settings.load_profile("qpronto")


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (M + M.conj().T)


def random_ket(rng, n):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)


@pytest.fixture(scope="session")
def benchmark_config():
    return load_preset("qubit_pi_pulse")


@pytest.fixture(scope="session")
def benchmark_run(benchmark_config):
    cfg = benchmark_config
    report = solve(
        cfg.system, cfg.cost(), cfg.x0, cfg.initial_guess(), cfg.solver_config(),
        keep_history=True,
    )
    return cfg, report


@pytest.fixture(scope="session")
def benchmark_first_iterate(benchmark_config):
    from qpronto import project

    cfg = benchmark_config
    return project(cfg.system, cfg.x0, cfg.initial_guess())


ACCEPTANCE_LINES = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_LINES[name] = ("PASS" if report.passed else "FAIL", report)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, report) in sorted(ACCEPTANCE_LINES.items(), key=lambda kv: _order(kv[0])):
        detail = dict(report.user_properties).get("detail", "")
        terminalreporter.write_line(f"{status}  {name}  {detail}")


def _order(name):
    digits = "".join(ch for ch in name.split("_")[1] if ch.isdigit())
    return (int(digits) if digits else 99, name)
