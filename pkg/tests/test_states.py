import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nrcg_battery.matcore import is_density_matrix
from nrcg_battery.states import (
    QubitHamiltonian,
    QubitInit,
    SystemSpec,
    excited_population_state,
    gibbs_state,
    pure_state,
    system_hamiltonian,
    system_state,
)

H = QubitHamiltonian()


def boltzmann_excited(kT):
    return math.exp(-1 / kT) / (1 + math.exp(-1 / kT))


@pytest.mark.parametrize(
    "kT, excited, rounded",
    [(4.0, boltzmann_excited(4.0), 0.43782), (0.4, boltzmann_excited(0.4), 0.07586)],
)
def test_gibbs_closed_form(kT, excited, rounded):
    rho = gibbs_state(H, kT)
    assert np.allclose(rho, np.diag([1 - excited, excited]), atol=1e-15)
    assert round(excited, 5) == rounded


def test_gibbs_limits():
    assert np.array_equal(gibbs_state(H, 0.0), np.diag([1.0, 0.0]))
    assert np.allclose(gibbs_state(H, math.inf), np.eye(2) / 2)
    with pytest.raises(ValueError):
        gibbs_state(H, -1.0)


@given(st.floats(0, 1e3, allow_nan=False))
def test_gibbs_valid_and_passive(kT):
    rho = gibbs_state(H, kT)
    assert is_density_matrix(rho, 1e-12)[0]
    assert rho[0, 0].real >= rho[1, 1].real


def test_pure_state_examples():
    assert np.allclose(pure_state(0.0, 1.3), np.diag([1, 0]))
    assert np.allclose(pure_state(math.pi, 0.2), np.diag([0, 1]), atol=1e-15)
    assert np.allclose(pure_state(math.pi / 2, math.pi), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
    with pytest.raises(ValueError):
        pure_state(4.0, 0.0)
    with pytest.raises(ValueError):
        pure_state(1.0, 2 * math.pi)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True))
def test_pure_state_is_rank_one(theta, phi):
    rho = pure_state(theta, phi)
    assert abs(np.trace(rho @ rho) - 1) < 1e-12
    assert is_density_matrix(rho, 1e-12)[0]
    assert abs(rho[0, 1] - math.cos(theta / 2) * math.sin(theta / 2) * np.exp(-1j * phi)) < 1e-15


@given(st.floats(0, math.pi))
def test_phi_zero_and_pi_mirror(theta):
    a, b = pure_state(theta, 0.0), pure_state(theta, math.pi)
    assert np.allclose(np.diag(a), np.diag(b))
    assert abs(a[0, 1].real + b[0, 1].real) < 1e-15


def test_excited_population_state():
    assert np.array_equal(excited_population_state(0.0), np.diag([1.0, 0.0]))
    assert np.array_equal(excited_population_state(0.5), np.diag([0.5, 0.5]))
    p = boltzmann_excited(0.4)
    assert np.allclose(excited_population_state(p), gibbs_state(H, 0.4), atol=1e-15)
    with pytest.raises(ValueError):
        excited_population_state(0.6)


def test_qubit_init_validation():
    with pytest.raises(ValueError):
        QubitInit("pure", theta=1.0)
    with pytest.raises(ValueError):
        QubitInit("thermal", kT=1.0, theta=0.0)
    with pytest.raises(ValueError):
        QubitInit.pure(-0.1)
    with pytest.raises(ValueError):
        QubitInit.excited_population(0.51)
    with pytest.raises(ValueError):
        QubitHamiltonian(1.0, 0.0)


def test_system_state_two_qubits():
    spec = SystemSpec(((H, QubitInit.thermal(4.0)), (H, QubitInit.pure(0.0, 0.0))))
    e = boltzmann_excited(4.0)
    rho = system_state(spec)
    assert np.allclose(rho, np.diag([1 - e, 0, e, 0]), atol=1e-15)


def test_system_state_all_ground():
    spec = SystemSpec(((H, QubitInit.thermal(0)), (H, QubitInit.pure(0, 0)), (H, QubitInit.thermal(0))))
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    assert np.allclose(system_state(spec), expected)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True), st.sampled_from([2, 3]))
def test_system_state_normalised(theta, phi, n):
    rho = system_state(SystemSpec.default(n, QubitInit.pure(theta, phi)))
    assert abs(np.trace(rho) - 1) < 1e-12
    assert is_density_matrix(rho, 1e-12)[0]


def enumerate_levels(levels):
    n = len(levels)
    out = []
    for index in range(2**n):
        bits = [(index >> (n - 1 - j)) & 1 for j in range(n)]
        out.append(sum(lv[b] for lv, b in zip(levels, bits)))
    return out


@pytest.mark.parametrize(
    "levels",
    [[(0, 1), (0, 1)], [(0, 1), (0, 1), (0, 1)], [(0, 1), (0, 0.5)], [(-0.2, 0.3), (0, 1), (0.1, 2)]],
)
def test_system_hamiltonian(levels):
    spec = SystemSpec(tuple((QubitHamiltonian(*lv), QubitInit.thermal(1.0)) for lv in levels))
    h = system_hamiltonian(spec)
    assert np.array_equal(np.diag(h).real, enumerate_levels(levels))
    assert np.all(h.imag == 0)
    assert np.all(h[~np.eye(len(h), dtype=bool)] == 0)


def test_default_hamiltonian_diagonals():
    assert enumerate_levels([(0, 1)] * 3) == [0, 1, 1, 2, 1, 2, 2, 3]
    assert np.array_equal(np.diag(system_hamiltonian(SystemSpec.default(2))).real, [0, 1, 1, 2])
    assert np.array_equal(np.diag(system_hamiltonian(SystemSpec.default(3))).real, [0, 1, 1, 2, 1, 2, 2, 3])


def test_spec_size():
    with pytest.raises(ValueError):
        SystemSpec(((H, QubitInit.thermal(1.0)),))
