"""Ergotropy and the performance measures derived from it.

The system Hamiltonian is always diagonal in the computational basis, so
the passive state simply pairs the eigenvalues of the density matrix
(largest first) with the energy levels (lowest first).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import as_matrix, hermitian_eigvals, is_density_matrix

ERGOTROPY_CLIP = 1e-10
ZERO_ENERGY = 1e-12
STATE_TOL = 1e-9


@dataclass(frozen=True)
class PassiveState:
    populations: np.ndarray  # non-increasing
    energies: np.ndarray  # non-decreasing
    passive_energy: float


@dataclass(frozen=True)
class MetricsRecord:
    iteration: int
    energy: float
    ergotropy: float
    ergotropy_variation: float
    ergotropy_ratio: float
    figure_of_merit: float
    power_work: float | None = None
    power_ergotropy: float | None = None


def _hamiltonian_diagonal(h) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim == 1:
        return h.real.astype(float)
    h = as_matrix(h)
    diag = np.diagonal(h)
    if np.any(np.abs(h - np.diag(diag)) > 0) or np.any(diag.imag != 0):
        raise ValueError("Hamiltonian must be real and diagonal")
    return diag.real.copy()


def _sorted_levels(h_diag: np.ndarray) -> np.ndarray:
    # stable sort: equal levels keep their index order
    return np.sort(h_diag, kind="stable")


def passive_energy_from_spectrum(eigenvalues: np.ndarray, h_diag: np.ndarray) -> np.ndarray:
    """Passive-state energy for one or many spectra (last axis = levels)."""
    pops = np.sort(np.maximum(eigenvalues, 0.0), axis=-1)[..., ::-1]
    return pops @ _sorted_levels(h_diag)


def passive_state(rho, h) -> PassiveState:
    ok, why = is_density_matrix(rho, STATE_TOL)
    if not ok:
        raise ValueError(f"invalid density matrix: {why}")
    h_diag = _hamiltonian_diagonal(h)
    lam = hermitian_eigvals(rho)
    pops = np.sort(np.maximum(lam, 0.0))[::-1]
    levels = _sorted_levels(h_diag)
    return PassiveState(pops, levels, float(pops @ levels))


def energy(rho, h) -> float:
    return float(np.real(np.diagonal(as_matrix(rho))) @ _hamiltonian_diagonal(h))


def _clip(w):
    return np.where((w < 0) & (w > -ERGOTROPY_CLIP), 0.0, w)


def ergotropy(rho, h) -> float:
    return float(_clip(energy(rho, h) - passive_state(rho, h).passive_energy))


def ergotropy_variation(record: MetricsRecord, initial_record: MetricsRecord) -> float:
    return record.ergotropy - initial_record.ergotropy


def _ratio(w, e):
    w, e = np.asarray(w, dtype=float), np.asarray(e, dtype=float)
    safe = np.where(e > ZERO_ENERGY, e, 1.0)
    return np.where(e > ZERO_ENERGY, w / safe, 0.0)


def ergotropy_ratio(rho_final, h) -> float:
    """Extractable fraction of the internal energy; 0 for a zero-energy state."""
    return float(_ratio(ergotropy(rho_final, h), energy(rho_final, h)))


def figure_of_merit(delta_w: float, ratio: float) -> float:
    return delta_w * ratio


def _duration(alpha: int, m: int) -> float:
    if alpha < 1:
        raise ValueError("power is undefined at zero duration (alpha = 0)")
    if alpha > m:
        raise ValueError(f"alpha={alpha} exceeds the total iteration count {m}")
    return alpha / m


def power_work(alpha: int, m: int, e_alpha: float, e_initial: float) -> float:
    return (e_alpha - e_initial) / _duration(alpha, m)


def power_ergotropy(alpha: int, m: int, delta_w_alpha: float) -> float:
    return delta_w_alpha / _duration(alpha, m)


METRIC_NAMES = ("energy", "ergotropy", "delta_w", "ratio", "fom", "power_work", "power_ergotropy")


def trajectory_metrics(states: np.ndarray, h_diag: np.ndarray, total_iterations: int | None = None) -> dict:
    """All metrics for states shaped (..., M+1, d, d); iteration is the second-last batch axis.

    Power columns hold NaN at iteration 0.  ``total_iterations`` sets the M in
    the duration alpha/M and defaults to the number of recorded steps minus one.
    """
    lam = hermitian_eigvals(states, STATE_TOL)
    e = np.real(np.diagonal(states, axis1=-2, axis2=-1)) @ h_diag
    w = _clip(e - passive_energy_from_spectrum(lam, h_diag))
    dw = w - w[..., :1]
    ratio = _ratio(w, e)
    steps = states.shape[-3]
    m = steps - 1 if total_iterations is None else total_iterations
    alpha = np.arange(steps, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        duration = np.where(alpha > 0, alpha / m, np.nan) if m > 0 else np.full(steps, np.nan)
        pw = (e - e[..., :1]) / duration
        pe = dw / duration
    return {
        "energy": e,
        "ergotropy": w,
        "delta_w": dw,
        "ratio": ratio,
        "fom": dw * ratio,
        "power_work": pw,
        "power_ergotropy": pe,
        "min_eigenvalue": lam[..., 0],
    }


def records_from_metrics(values: dict, iterations=None) -> list[MetricsRecord]:
    """Turn a single trajectory's metric arrays into MetricsRecord objects."""
    n = len(values["energy"])
    iterations = range(n) if iterations is None else iterations
    out = []
    for i, it in enumerate(iterations):
        pw = values["power_work"][i]
        pe = values["power_ergotropy"][i]
        out.append(
            MetricsRecord(
                iteration=int(it),
                energy=float(values["energy"][i]),
                ergotropy=float(values["ergotropy"][i]),
                ergotropy_variation=float(values["delta_w"][i]),
                ergotropy_ratio=float(values["ratio"][i]),
                figure_of_merit=float(values["fom"][i]),
                power_work=None if np.isnan(pw) else float(pw),
                power_ergotropy=None if np.isnan(pe) else float(pe),
            )
        )
    return out
