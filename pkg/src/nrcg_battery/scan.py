"""Grid sweeps over the initial state of qubit B and the derived comparisons.

Grid cells are evaluated in fixed-size chunks.  The chunking does not depend
on the worker count, so serial and parallel runs compute bit-identical values.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .metrics import METRIC_NAMES, trajectory_metrics
from .protocol import (
    CircuitCase,
    ProtocolConfig,
    Trajectory,
    check_states,
    evolve,
    run,
    run_pair_comparison,
)
from .states import DEFAULT_KT_C, InitKind, QubitHamiltonian, QubitInit, SystemSpec, system_hamiltonian_diagonal, system_state

CHUNK_CELLS = 64
SCAN_METRICS = ("energy", "ergotropy", "delta_w", "ratio", "fom", "power_work", "power_ergotropy")
COMPARISON_METRICS = ("ergotropy", "delta_w", "ratio", "fom")
DEFAULT_ROOTS = (1, 2, 3, 5, 10, 15, 20)


@dataclass(frozen=True)
class ScanGrid:
    theta_points: int = 101
    phi_points: int = 101
    phi_fixed: float | None = None
    p_points: int = 51

    def __post_init__(self):
        for name in ("theta_points", "phi_points", "p_points"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if self.phi_fixed is not None and not 0.0 <= self.phi_fixed < 2 * math.pi:
            raise ValueError(f"phi_fixed={self.phi_fixed} outside [0, 2*pi)")

    def thetas(self) -> np.ndarray:
        if self.theta_points == 1:
            return np.zeros(1)
        return np.linspace(0.0, math.pi, self.theta_points)

    def phis(self) -> np.ndarray:
        return np.arange(self.phi_points) * (2 * math.pi / self.phi_points)

    def populations(self) -> np.ndarray:
        if self.p_points == 1:
            return np.zeros(1)
        return np.linspace(0.0, 0.5, self.p_points)


@dataclass
class ScanResult:
    """Metric values on a grid plus the full per-row table behind them.

    ``values`` is shaped by ``axes`` (in order).  ``table`` maps every CSV
    column to a 1-D array in emission order; ``argmax`` locates the largest
    finite value.
    """

    metric: str
    axes: dict[str, np.ndarray]
    values: np.ndarray
    table: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)
    argmax: dict = field(default_factory=dict)


def _check_metric(metric: str) -> None:
    if metric not in SCAN_METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(SCAN_METRICS)}")


def _evaluate_chunk(config: ProtocolConfig, inits: Sequence[QubitInit]) -> dict[str, np.ndarray]:
    rho0 = np.stack([system_state(config.spec.with_b(b)) for b in inits])
    h = system_hamiltonian_diagonal(config.spec)
    states = evolve(rho0, config.unitary(), config.iterations)
    values = trajectory_metrics(states, h)
    check_states(states, values["min_eigenvalue"])
    return {k: values[k] for k in METRIC_NAMES}


def _evaluate_chunk_args(args):
    return _evaluate_chunk(*args)


def evaluate_cells(config: ProtocolConfig, inits: Sequence[QubitInit], threads: int = 1) -> dict[str, np.ndarray]:
    """Metric arrays shaped (cells, M+1) for each qubit-B initialisation."""
    chunks = [(config, inits[i : i + CHUNK_CELLS]) for i in range(0, len(inits), CHUNK_CELLS)]
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_evaluate_chunk_args, chunks))
    else:
        parts = [_evaluate_chunk(*c) for c in chunks]
    return {k: np.concatenate([p[k] for p in parts]) for k in METRIC_NAMES}


def default_threads() -> int:
    return os.cpu_count() or 1


def _b_phi(config: ProtocolConfig, grid: ScanGrid) -> float:
    if grid.phi_fixed is not None:
        return grid.phi_fixed
    b = config.spec.qubits[1][1]
    return b.phi if b.kind is InitKind.PURE else 0.0


def _metadata(config: ProtocolConfig, grid: ScanGrid, metric: str, kind: str) -> dict:
    return {
        "version": __version__,
        "scan": kind,
        "metric": metric,
        "config": config_echo(config),
        "grid": {
            "theta_points": grid.theta_points,
            "phi_points": grid.phi_points,
            "phi_fixed": grid.phi_fixed,
            "p_points": grid.p_points,
        },
        "gate_sequence": [g.label() for g in config.gates()],
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def config_echo(config: ProtocolConfig) -> dict:
    qubits = []
    for h, init in config.spec.qubits:
        entry = {"eps1": h.eps1, "eps2": h.eps2, "kind": init.kind.value}
        for name in ("kT", "theta", "phi", "p_excited"):
            value = getattr(init, name)
            if value is not None:
                entry[name] = value
        qubits.append(entry)
    return {
        "n_qubits": config.n_qubits,
        "case": int(config.case),
        "root": config.root,
        "iterations": config.iterations,
        "qubits": qubits,
    }


def _common_columns(config: ProtocolConfig, rows: int) -> dict[str, np.ndarray]:
    return {
        "case": np.full(rows, int(config.case)),
        "n_qubits": np.full(rows, config.n_qubits),
        "root_n": np.full(rows, config.root),
    }


def scan_theta_iterations(config: ProtocolConfig, grid: ScanGrid, metric: str, threads: int = 1) -> ScanResult:
    """Metric over theta (rows) and iterations 0..M (columns) at one phi."""
    _check_metric(metric)
    phi = _b_phi(config, grid)
    thetas = grid.thetas()
    values = evaluate_cells(config, [QubitInit.pure(t, phi) for t in thetas], threads)
    steps = config.iterations + 1
    rows = len(thetas) * steps
    table = _common_columns(config, rows)
    table["theta"] = np.repeat(thetas, steps)
    table["phi"] = np.full(rows, phi)
    table["iteration"] = np.tile(np.arange(steps), len(thetas))
    for k in METRIC_NAMES:
        table[k] = values[k].reshape(-1)
    grid_values = values[metric]
    i, j = np.unravel_index(np.nanargmax(grid_values), grid_values.shape)
    return ScanResult(
        metric=metric,
        axes={"theta": thetas, "iteration": np.arange(steps)},
        values=grid_values,
        table=table,
        metadata=_metadata(config, grid, metric, "theta_iterations") | {"phi": phi},
        argmax={"theta": float(thetas[i]), "phi": phi, "iteration": int(j), "value": float(grid_values[i, j])},
    )


def scan_theta_phi_max(config: ProtocolConfig, grid: ScanGrid, metric: str, threads: int = 1) -> ScanResult:
    """Per (theta, phi) cell, the maximum of ``metric`` over iterations 0..M.

    The table row for a cell reports every metric at the maximising iteration.
    """
    _check_metric(metric)
    thetas, phis = grid.thetas(), grid.phis()
    inits = [QubitInit.pure(t, f) for t in thetas for f in phis]
    values = evaluate_cells(config, inits, threads)
    series = values[metric]
    best_it = np.nanargmax(series, axis=1)
    cells = np.arange(len(inits))
    table = _common_columns(config, len(inits))
    table["theta"] = np.repeat(thetas, len(phis))
    table["phi"] = np.tile(phis, len(thetas))
    table["iteration"] = best_it
    for k in METRIC_NAMES:
        table[k] = values[k][cells, best_it]
    grid_values = series[cells, best_it].reshape(len(thetas), len(phis))
    flat = int(np.nanargmax(grid_values))
    i, j = np.unravel_index(flat, grid_values.shape)
    return ScanResult(
        metric=metric,
        axes={"theta": thetas, "phi": phis},
        values=grid_values,
        table=table,
        metadata=_metadata(config, grid, metric, "theta_phi_max"),
        argmax={
            "theta": float(thetas[i]),
            "phi": float(phis[j]),
            "iteration": int(best_it[flat]),
            "value": float(grid_values[i, j]),
        },
    )


@dataclass
class CnotComparison:
    theta_star: float
    phi: float
    nrcg: Trajectory
    cnot: Trajectory


def cnot_comparison(config: ProtocolConfig, grid: ScanGrid | None = None, threads: int = 1) -> CnotComparison:
    """Pick the theta whose Nth-root run reaches the highest ergotropy, then pair it with full CNOTs.

    Ties go to the smaller theta.
    """
    grid = grid or ScanGrid()
    if config.iterations % config.root:
        raise ValueError(f"iterations ({config.iterations}) must be a multiple of the root ({config.root})")
    scan = scan_theta_iterations(config, grid, "ergotropy", threads)
    best = np.max(scan.values, axis=1)
    i = int(np.argmax(best))
    theta = float(scan.axes["theta"][i])
    phi = scan.metadata["phi"]
    at_best = replace(config, spec=config.spec.with_b(QubitInit.pure(theta, phi)))
    nrcg, cnot = run_pair_comparison(at_best)
    return CnotComparison(theta, phi, nrcg, cnot)


@dataclass
class ComparisonEntry:
    n_qubits: int
    b_init: str  # "pure" or "thermal"
    case: int
    metric: str
    value: float
    iteration: int
    theta: float | None = None
    phi: float | None = None
    p_excited: float | None = None


@dataclass
class ThermalComparison:
    entries: list[ComparisonEntry]
    metadata: dict = field(default_factory=dict)

    def get(self, n_qubits: int, b_init: str, case: int, metric: str) -> ComparisonEntry:
        for e in self.entries:
            if (e.n_qubits, e.b_init, e.case, e.metric) == (n_qubits, b_init, case, metric):
                return e
        raise KeyError((n_qubits, b_init, case, metric))


def _variant_spec(base: ProtocolConfig, n_qubits: int) -> SystemSpec:
    qubits = list(base.spec.qubits)
    if n_qubits == 2:
        return SystemSpec(tuple(qubits[:2]))
    if len(qubits) == 3:
        return base.spec
    return SystemSpec(tuple(qubits) + ((QubitHamiltonian(), QubitInit.thermal(DEFAULT_KT_C)),))


def thermal_comparison(base_config: ProtocolConfig, grid: ScanGrid | None = None, threads: int = 1) -> ThermalComparison:
    """Maxima of four measures for pure versus thermal qubit B, every case and size.

    Pure B is scanned over theta x phi, thermal B over its excited
    population; maxima also run over iterations 0..M.
    """
    grid = grid or ScanGrid()
    thetas, phis, pops = grid.thetas(), grid.phis(), grid.populations()
    pure_cells = [(t, f) for t in thetas for f in phis]
    pure_inits = [QubitInit.pure(t, f) for t, f in pure_cells]
    thermal_inits = [QubitInit.excited_population(p) for p in pops]
    entries = []
    for n_qubits in (2, 3):
        spec = _variant_spec(base_config, n_qubits)
        for case in CircuitCase:
            config = replace(base_config, spec=spec, case=case)
            for b_init, inits in (("pure", pure_inits), ("thermal", thermal_inits)):
                values = evaluate_cells(config, inits, threads)
                for metric in COMPARISON_METRICS:
                    series = values[metric]
                    cell, it = np.unravel_index(int(np.argmax(series)), series.shape)
                    entry = ComparisonEntry(n_qubits, b_init, int(case), metric, float(series[cell, it]), int(it))
                    if b_init == "pure":
                        entry.theta, entry.phi = (float(x) for x in pure_cells[cell])
                    else:
                        entry.p_excited = float(pops[cell])
                    entries.append(entry)
    meta = _metadata(base_config, grid, ",".join(COMPARISON_METRICS), "thermal_comparison")
    meta.pop("gate_sequence")
    meta["gate_sequences"] = {
        f"{n}q-case{int(c)}": [g.label() for g in replace(base_config, spec=_variant_spec(base_config, n), case=c).gates()]
        for n in (2, 3)
        for c in CircuitCase
    }
    return ThermalComparison(entries, meta)


def convergence_study(config: ProtocolConfig, roots: Sequence[int] = DEFAULT_ROOTS) -> dict[int, Trajectory]:
    """Ergotropy trajectories over two cycles (M = 2N) for each root N."""
    return {n: run(replace(config, root=n, iterations=2 * n)) for n in roots}


def max_step_jump(traj: Trajectory, field: str = "ergotropy") -> float:
    values = traj.series(field)
    return float(np.max(np.abs(np.diff(values)))) if len(values) > 1 else 0.0


def cycle_fraction_gap(a: Trajectory, b: Trajectory, field: str = "ergotropy") -> float:
    """Largest pointwise difference after mapping both iteration axes to cycle fraction.

    Points of ``a`` are compared with ``b`` linearly interpolated at the same
    fraction.
    """
    xa = np.arange(len(a.records)) / a.config.root
    xb = np.arange(len(b.records)) / b.config.root
    return float(np.max(np.abs(a.series(field) - np.interp(xa, xb, b.series(field)))))
