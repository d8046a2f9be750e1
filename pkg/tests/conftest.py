import numpy as np
import pytest

X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
CNOT_AB = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CNOT_BA = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)


def random_density_matrix(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


def pytest_runtest_makereport(item, call):
    if call.when != "call" or item.module.__name__ != "test_acceptance":
        return
    outcome = "PASS" if call.excinfo is None else "FAIL"
    label = (item.function.__doc__ or item.name).strip().splitlines()[0]
    details = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    item.config._acceptance_lines = getattr(item.config, "_acceptance_lines", [])
    item.config._acceptance_lines.append(f"[{outcome}] {label}" + (f"  ({details})" if details else ""))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
