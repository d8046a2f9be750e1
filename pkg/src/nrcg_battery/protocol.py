"""Circuit cases and the iterated evolution rho -> U rho U^dagger."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .gates import GateSpec, iteration_unitary
from .matcore import hermiticity_error
from .metrics import STATE_TOL, MetricsRecord, records_from_metrics, trajectory_metrics
from .states import SystemSpec, system_hamiltonian_diagonal, system_state

A, B, C = 0, 1, 2

# (control, target) pairs per iteration, applied left to right
CASE_PAIRS = {
    2: {
        1: [(A, B)],
        2: [(B, A)],
        3: [(A, B), (B, A)],
    },
    3: {
        1: [(A, B), (B, C)],
        2: [(B, A), (C, B)],
        3: [(A, B), (B, A), (B, C), (C, B)],
    },
}


class CircuitCase(IntEnum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3


class StateValidityError(RuntimeError):
    def __init__(self, iteration: int, reason: str):
        super().__init__(f"state invalid at iteration {iteration}: {reason}")
        self.iteration = iteration


def gate_sequence(case, n_qubits: int, root: int) -> list[GateSpec]:
    case = CircuitCase(case)
    if n_qubits not in CASE_PAIRS:
        raise ValueError(f"n_qubits must be 2 or 3, got {n_qubits}")
    return [GateSpec(c, t, root) for c, t in CASE_PAIRS[n_qubits][int(case)]]


@dataclass(frozen=True)
class ProtocolConfig:
    spec: SystemSpec
    case: CircuitCase = CircuitCase.CASE1
    root: int = 15
    iterations: int = 30

    def __post_init__(self):
        object.__setattr__(self, "case", CircuitCase(self.case))
        if int(self.root) != self.root or self.root < 1:
            raise ValueError(f"root must be a positive integer, got {self.root}")
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise ValueError(f"iterations must be a non-negative integer, got {self.iterations}")

    @property
    def n_qubits(self) -> int:
        return self.spec.n_qubits

    def gates(self) -> list[GateSpec]:
        return gate_sequence(self.case, self.n_qubits, self.root)

    def unitary(self) -> np.ndarray:
        return iteration_unitary(self.gates(), self.n_qubits)


@dataclass(frozen=True)
class Trajectory:
    records: list[MetricsRecord]
    states: np.ndarray  # (M+1, d, d)
    config: ProtocolConfig

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def series(self, field: str) -> np.ndarray:
        return np.array([getattr(r, field) for r in self.records], dtype=float)


def evolve(rho0: np.ndarray, u: np.ndarray, iterations: int) -> np.ndarray:
    """Stack of states after 0..iterations applications of ``u``.

    ``rho0`` may carry leading batch axes; the iteration axis is inserted just
    before the matrix axes.
    """
    ud = u.conj().T
    out = np.empty(rho0.shape[:-2] + (iterations + 1,) + rho0.shape[-2:], dtype=np.complex128)
    rho = rho0
    out[..., 0, :, :] = rho
    for k in range(1, iterations + 1):
        rho = u @ rho @ ud
        out[..., k, :, :] = rho
    return out


def check_states(states: np.ndarray, min_eigenvalue: np.ndarray, tol: float = STATE_TOL) -> None:
    """Raise StateValidityError naming the first iteration that drifted."""
    tr = np.real(np.trace(states, axis1=-2, axis2=-1))
    bad = (
        (np.abs(tr - 1.0) > tol)
        | (hermiticity_error(states) > tol)
        | (min_eigenvalue < -tol)
    )
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        it = int(idx[-1])
        where = tuple(int(i) for i in idx)
        raise StateValidityError(
            it,
            f"trace={tr[where]:.12g}, min eigenvalue={min_eigenvalue[where]:.3e}",
        )


def run(config: ProtocolConfig, *, stride: int = 1) -> Trajectory:
    """Evolve ``config`` and record metrics at every iteration.

    ``stride`` relabels record k as iteration k*stride; powers still use the
    run's own iteration count as the full duration.
    """
    rho0 = system_state(config.spec)
    h = system_hamiltonian_diagonal(config.spec)
    states = evolve(rho0, config.unitary(), config.iterations)
    values = trajectory_metrics(states, h)
    check_states(states, values["min_eigenvalue"])
    iterations = range(0, stride * config.iterations + 1, stride)
    return Trajectory(records_from_metrics(values, iterations), states, config)


def run_pair_comparison(config: ProtocolConfig) -> tuple[Trajectory, Trajectory]:
    """The Nth-root run and the full-CNOT run on one iteration axis.

    The CNOT circuit is iterated M/N times and its k-th record is labelled
    iteration k*N, so both trajectories share the cycle boundaries.
    """
    n, m = config.root, config.iterations
    if m % n:
        raise ValueError(f"iterations ({m}) must be a multiple of the root ({n})")
    nrcg = run(config)
    cnot = run(replace(config, root=1, iterations=m // n), stride=n)
    return nrcg, cnot


def held_series(cnot: Trajectory, field: str, iterations: int) -> np.ndarray:
    """Step curve of a strided trajectory evaluated at every iteration 0..iterations."""
    labels = np.array([r.iteration for r in cnot.records])
    values = cnot.series(field)
    idx = np.searchsorted(labels, np.arange(iterations + 1), side="right") - 1
    return values[idx]
