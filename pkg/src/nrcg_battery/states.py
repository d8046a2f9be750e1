"""Single-qubit Hamiltonians, initial states and their product system state.

Energies are in units of the excited level of qubit B.  Basis ordering is
big-endian: qubit A is the most significant bit, so ``|b_A b_B b_C>`` is row
``4 b_A + 2 b_B + b_C`` of a three-qubit matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from .matcore import kron

DEFAULT_KT_A = 4.0
DEFAULT_KT_C = 0.4


@dataclass(frozen=True)
class QubitHamiltonian:
    eps1: float = 0.0
    eps2: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.eps1) and math.isfinite(self.eps2)):
            raise ValueError("qubit energies must be finite")
        if self.eps1 > self.eps2:
            raise ValueError(f"eps1={self.eps1} must not exceed eps2={self.eps2}")

    def matrix(self) -> np.ndarray:
        return np.diag([self.eps1, self.eps2]).astype(np.complex128)


class InitKind(str, Enum):
    THERMAL = "thermal"
    PURE = "pure"
    EXCITED_POPULATION = "excited"


@dataclass(frozen=True)
class QubitInit:
    """How one qubit starts out.

    Build instances with :meth:`thermal`, :meth:`pure` or
    :meth:`excited_population`; fields that do not belong to the chosen kind
    stay ``None``.  ``kT=math.inf`` is accepted as the infinite-temperature
    limit.
    """

    kind: InitKind
    kT: float | None = None
    theta: float | None = None
    phi: float | None = None
    p_excited: float | None = None

    def __post_init__(self):
        kind = InitKind(self.kind)
        object.__setattr__(self, "kind", kind)
        populated = {
            "kT": self.kT is not None,
            "theta": self.theta is not None,
            "phi": self.phi is not None,
            "p_excited": self.p_excited is not None,
        }
        wanted = {
            InitKind.THERMAL: {"kT"},
            InitKind.PURE: {"theta", "phi"},
            InitKind.EXCITED_POPULATION: {"p_excited"},
        }[kind]
        have = {k for k, v in populated.items() if v}
        if have != wanted:
            raise ValueError(f"{kind.value} init needs exactly {sorted(wanted)}, got {sorted(have)}")
        if kind is InitKind.THERMAL:
            if math.isnan(self.kT) or self.kT < 0:
                raise ValueError(f"kT must be >= 0, got {self.kT}")
        elif kind is InitKind.PURE:
            check_theta(self.theta)
            check_phi(self.phi)
        else:
            if not 0.0 <= self.p_excited <= 0.5:
                raise ValueError(f"p_excited must lie in [0, 1/2], got {self.p_excited}")

    @classmethod
    def thermal(cls, kT: float) -> QubitInit:
        return cls(InitKind.THERMAL, kT=float(kT))

    @classmethod
    def pure(cls, theta: float, phi: float = 0.0) -> QubitInit:
        return cls(InitKind.PURE, theta=float(theta), phi=float(phi))

    @classmethod
    def excited_population(cls, p: float) -> QubitInit:
        return cls(InitKind.EXCITED_POPULATION, p_excited=float(p))

    def density_matrix(self, h: QubitHamiltonian) -> np.ndarray:
        if self.kind is InitKind.THERMAL:
            return gibbs_state(h, self.kT)
        if self.kind is InitKind.PURE:
            return pure_state(self.theta, self.phi)
        return excited_population_state(self.p_excited)


def check_theta(theta: float) -> None:
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta={theta} outside [0, pi]")


def check_phi(phi: float) -> None:
    if not 0.0 <= phi < 2 * math.pi:
        raise ValueError(f"phi={phi} outside [0, 2*pi)")


@dataclass(frozen=True)
class SystemSpec:
    """Ordered (Hamiltonian, init) pairs for qubits A, B and optionally C."""

    qubits: tuple[tuple[QubitHamiltonian, QubitInit], ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(tuple(q) for q in self.qubits))
        if len(self.qubits) not in (2, 3):
            raise ValueError(f"only 2- and 3-qubit registers are supported, got {len(self.qubits)}")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @classmethod
    def default(
        cls,
        n_qubits: int = 3,
        b_init: QubitInit | None = None,
        kT_A: float = DEFAULT_KT_A,
        kT_C: float = DEFAULT_KT_C,
    ) -> SystemSpec:
        h = QubitHamiltonian()
        b_init = b_init if b_init is not None else QubitInit.pure(math.pi, math.pi)
        qubits = [(h, QubitInit.thermal(kT_A)), (h, b_init)]
        if n_qubits == 3:
            qubits.append((h, QubitInit.thermal(kT_C)))
        return cls(tuple(qubits))

    def with_b(self, b_init: QubitInit) -> SystemSpec:
        qubits = list(self.qubits)
        qubits[1] = (qubits[1][0], b_init)
        return SystemSpec(tuple(qubits))


def gibbs_state(h: QubitHamiltonian, kT: float) -> np.ndarray:
    if kT < 0:
        raise ValueError(f"kT must be >= 0, got {kT}")
    if kT == 0:
        # ground-state limit; degenerate levels share the population
        pops = np.array([1.0, 1.0 if h.eps2 == h.eps1 else 0.0])
    elif math.isinf(kT):
        pops = np.array([1.0, 1.0])
    else:
        # shift by the ground energy so large eps/kT cannot underflow both terms
        with np.errstate(over="ignore"):
            pops = np.exp(-(np.array([h.eps1, h.eps2]) - h.eps1) / kT)
    return np.diag(pops / pops.sum()).astype(np.complex128)


def pure_state(theta: float, phi: float) -> np.ndarray:
    check_theta(theta)
    check_phi(phi)
    psi = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    return np.outer(psi, psi.conj())


def excited_population_state(p: float) -> np.ndarray:
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p={p} outside [0, 1/2]")
    return np.diag([1.0 - p, p]).astype(np.complex128)


def system_state(spec: SystemSpec) -> np.ndarray:
    return reduce(kron, [init.density_matrix(h) for h, init in spec.qubits])


def system_hamiltonian_diagonal(spec: SystemSpec) -> np.ndarray:
    """Real diagonal of the non-interacting Hamiltonian, one entry per basis state."""
    n = spec.n_qubits
    levels = np.zeros(2**n)
    for index in range(2**n):
        for j, (h, _) in enumerate(spec.qubits):
            bit = (index >> (n - 1 - j)) & 1
            levels[index] += h.eps2 if bit else h.eps1
    return levels


def system_hamiltonian(spec: SystemSpec) -> np.ndarray:
    return np.diag(system_hamiltonian_diagonal(spec)).astype(np.complex128)
