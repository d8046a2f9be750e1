"""CNOT and Nth-root CNOT unitaries on 2- and 3-qubit registers."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

QUBIT_NAMES = "ABC"


@dataclass(frozen=True)
class GateSpec:
    control: int
    target: int
    root: int = 1

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("control and target must differ")
        if min(self.control, self.target) < 0:
            raise ValueError("qubit indices must be non-negative")
        if int(self.root) != self.root or self.root < 1:
            raise ValueError(f"root must be a positive integer, got {self.root}")

    def label(self) -> str:
        return f"{QUBIT_NAMES[self.control]}->{QUBIT_NAMES[self.target]}"


def root_coefficients(root: int) -> tuple[complex, complex]:
    """Diagonal and off-diagonal entries (s, p) of the active 2x2 block."""
    if int(root) != root or root < 1:
        raise ValueError(f"root must be a positive integer, got {root}")
    if root == 1:
        # exact CNOT; avoids the 1e-16 residue of 1 + e^{i pi}
        return 0j, 1 + 0j
    w = cmath.exp(1j * math.pi / root)
    return 0.5 + 0.5 * w, 0.5 - 0.5 * w


def nrcg_2q(control_first: bool, root: int) -> np.ndarray:
    """The 4x4 Nth-root CNOT with A->B (``control_first``) or B->A layout."""
    return embed_gate(GateSpec(0, 1, root) if control_first else GateSpec(1, 0, root), 2)


def embed_gate(spec: GateSpec, n_qubits: int) -> np.ndarray:
    """Full-register unitary built by enumerating basis states.

    States whose control bit is 0 are left alone; for control bit 1 the
    block [[s, p], [p, s]] mixes the two values of the target bit.
    """
    if n_qubits not in (2, 3):
        raise ValueError(f"n_qubits must be 2 or 3, got {n_qubits}")
    if max(spec.control, spec.target) >= n_qubits:
        raise ValueError(f"gate {spec} does not fit a {n_qubits}-qubit register")
    s, p = root_coefficients(spec.root)
    dim = 2**n_qubits
    cbit = 1 << (n_qubits - 1 - spec.control)
    tbit = 1 << (n_qubits - 1 - spec.target)
    u = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        if col & cbit:
            u[col, col] = s
            u[col ^ tbit, col] = p
        else:
            u[col, col] = 1.0
    return u


def iteration_unitary(gates: Sequence[GateSpec], n_qubits: int) -> np.ndarray:
    """Product of the listed gates, the first gate acting first."""
    if not gates:
        raise ValueError("gate list is empty")
    u = np.eye(2**n_qubits, dtype=np.complex128)
    for g in gates:
        u = embed_gate(g, n_qubits) @ u
    return u
