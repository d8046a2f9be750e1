import math
from dataclasses import replace

import numpy as np
import pytest

from nrcg_battery.protocol import ProtocolConfig, run
from nrcg_battery.scan import (
    ScanGrid,
    convergence_study,
    cycle_fraction_gap,
    evaluate_cells,
    max_step_jump,
    scan_theta_iterations,
    scan_theta_phi_max,
    thermal_comparison,
)
from nrcg_battery.states import QubitInit, SystemSpec


def config(n=3, case=1, phi=math.pi, iterations=30):
    return ProtocolConfig(SystemSpec.default(n, QubitInit.pure(0.0, phi)), case, 15, iterations)


SMALL = ScanGrid(theta_points=9, phi_points=6)


def test_grid_axes():
    g = ScanGrid()
    assert g.thetas()[0] == 0 and g.thetas()[-1] == math.pi and len(g.thetas()) == 101
    assert g.phis()[0] == 0 and g.phis()[-1] < 2 * math.pi and len(g.phis()) == 101
    assert g.populations()[-1] == 0.5 and len(g.populations()) == 51
    with pytest.raises(ValueError):
        ScanGrid(theta_points=0)
    with pytest.raises(ValueError):
        ScanGrid(phi_fixed=7.0)


def test_scan_shape_and_table():
    res = scan_theta_iterations(config(iterations=10), SMALL, "fom")
    assert res.values.shape == (9, 11)
    assert res.values.size == np.prod([len(a) for a in res.axes.values()])
    assert len(res.table["theta"]) == 99
    assert np.all(res.table["iteration"][:11] == np.arange(11))


def test_delta_w_starts_at_zero():
    res = scan_theta_iterations(config(), SMALL, "delta_w")
    assert np.all(res.values[:, 0] == 0)


def test_power_is_undefined_at_iteration_zero():
    res = scan_theta_iterations(config(iterations=5), SMALL, "power_work")
    assert np.all(np.isnan(res.values[:, 0])) and np.all(np.isfinite(res.values[:, 1:]))


def test_unknown_metric():
    with pytest.raises(ValueError, match="unknown metric"):
        scan_theta_iterations(config(), SMALL, "entropy")


def test_scan_rows_match_single_runs():
    cfg = config(n=2, case=3, phi=1.0)
    res = scan_theta_iterations(cfg, SMALL, "ergotropy")
    for i in (0, 4, 8):
        theta = float(res.axes["theta"][i])
        traj = run(replace(cfg, spec=cfg.spec.with_b(QubitInit.pure(theta, 1.0))))
        assert np.allclose(res.values[i], traj.series("ergotropy"), atol=1e-14)


def test_initial_ergotropy_grows_with_theta():
    res = scan_theta_iterations(config(n=2), ScanGrid(theta_points=41), "ergotropy")
    assert np.all(np.diff(res.values[:, 0]) >= -1e-12)
    assert res.values[-1, 0] > res.values[0, 0]


def test_three_qubit_case1_ergotropy_peak_location():
    res = scan_theta_iterations(config(), ScanGrid(), "ergotropy")
    assert 10 <= res.argmax["iteration"] <= 25
    assert res.argmax["theta"] >= 1.9


def test_determinism_and_worker_independence():
    cfg = config(n=3, case=3)
    serial = scan_theta_phi_max(cfg, SMALL, "power_ergotropy", threads=1)
    again = scan_theta_phi_max(cfg, SMALL, "power_ergotropy", threads=1)
    parallel = scan_theta_phi_max(cfg, SMALL, "power_ergotropy", threads=2)
    for other in (again, parallel):
        assert np.array_equal(serial.values, other.values, equal_nan=True)
        for k in serial.table:
            assert np.array_equal(serial.table[k], other.table[k], equal_nan=True)


def test_chunking_does_not_change_values(monkeypatch):
    from nrcg_battery import scan

    cfg = config(n=3, case=2)
    inits = [QubitInit.pure(t, f) for t in SMALL.thetas() for f in SMALL.phis()]
    a = evaluate_cells(cfg, inits)
    monkeypatch.setattr(scan, "CHUNK_CELLS", 7)
    b = evaluate_cells(cfg, inits)
    for k in a:
        assert np.array_equal(a[k], b[k], equal_nan=True)


def test_poles_are_phi_independent():
    res = scan_theta_phi_max(config(), ScanGrid(theta_points=5, phi_points=12), "fom")
    for row in (res.values[0], res.values[-1]):
        assert np.max(row) - np.min(row) < 1e-10


def test_diagonal_b_states_ignore_phase():
    # dephased B: only the excited population survives, so results cannot depend on phi
    cfg = config()
    inits = [QubitInit.excited_population(p) for p in (0.0, 0.2, 0.5)]
    a = evaluate_cells(cfg, inits)
    b = evaluate_cells(replace(cfg, spec=cfg.spec.with_b(QubitInit.pure(1.0, 2.0))), inits)
    assert np.array_equal(a["delta_w"], b["delta_w"])


def test_grid_refinement_is_stable():
    for metric in ("delta_w", "fom", "ergotropy"):
        coarse = scan_theta_iterations(config(), ScanGrid(theta_points=101), metric).argmax["value"]
        fine = scan_theta_iterations(config(), ScanGrid(theta_points=201), metric).argmax["value"]
        assert abs(coarse - fine) < 0.01


def test_thermal_comparison_layout():
    cmp = thermal_comparison(config(), ScanGrid(theta_points=5, phi_points=4, p_points=5))
    assert len(cmp.entries) == 2 * 2 * 3 * 4
    e = cmp.get(3, "thermal", 2, "fom")
    assert e.p_excited is not None and e.theta is None
    e = cmp.get(2, "pure", 1, "ergotropy")
    assert e.theta is not None and e.phi is not None
    assert set(cmp.metadata["gate_sequences"]) == {f"{n}q-case{c}" for n in (2, 3) for c in (1, 2, 3)}


def test_convergence_study_shapes():
    cfg = replace(config(case=3), spec=SystemSpec.default(3, QubitInit.pure(math.pi, math.pi)))
    trajs = convergence_study(cfg, (1, 2, 5))
    assert [len(t.records) for t in trajs.values()] == [3, 5, 11]
    first = {t.records[0] for t in trajs.values()}
    assert len(first) == 1
    assert max_step_jump(trajs[5]) < max_step_jump(trajs[1])
    assert cycle_fraction_gap(trajs[5], trajs[5]) == 0
