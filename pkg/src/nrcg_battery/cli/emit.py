"""CSV and JSON writers for trajectories, scans and the run manifest."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .. import __version__
from ..protocol import Trajectory
from ..scan import ScanResult, ThermalComparison, config_echo
from ..states import InitKind

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "case", "n_qubits", "root_n", "theta", "phi", "iteration",
    "energy", "ergotropy", "delta_w", "ratio", "fom", "power_work", "power_ergotropy",
)
INT_COLUMNS = {"case", "n_qubits", "root_n", "iteration"}
SUMMARY_COLUMNS = ("n_qubits", "b_init", "case", "metric", "value", "iteration", "theta", "phi", "p_excited")
_RECORD_FIELDS = {
    "energy": "energy",
    "ergotropy": "ergotropy",
    "delta_w": "ergotropy_variation",
    "ratio": "ergotropy_ratio",
    "fom": "figure_of_merit",
    "power_work": "power_work",
    "power_ergotropy": "power_ergotropy",
}


@dataclass
class RunManifest:
    version: str
    command: str
    config: dict[str, str]
    provenance: dict[str, list[str]]
    outputs: list[str] = field(default_factory=list)
    timestamp: str = ""
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunManifest:
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def loads(cls, text: str) -> RunManifest:
        return cls.from_dict(json.loads(text))


def new_manifest(command: str, config: dict[str, str], provenance: dict[str, list[str]], extra=None) -> RunManifest:
    return RunManifest(
        version=__version__,
        command=command,
        config=dict(config),
        provenance=provenance,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        extra=extra or {},
    )


def manifest_path(data_path: str | Path) -> Path:
    data_path = Path(data_path)
    return data_path.with_name(data_path.name + ".manifest.json")


def trajectory_table(traj: Trajectory) -> dict[str, np.ndarray]:
    cfg = traj.config
    n = len(traj.records)
    b = cfg.spec.qubits[1][1]
    pure = b.kind is InitKind.PURE
    table = {
        "case": np.full(n, int(cfg.case)),
        "n_qubits": np.full(n, cfg.n_qubits),
        "root_n": np.full(n, cfg.root),
        "theta": np.full(n, b.theta if pure else np.nan),
        "phi": np.full(n, b.phi if pure else np.nan),
        "iteration": np.array([r.iteration for r in traj.records]),
    }
    for col, attr in _RECORD_FIELDS.items():
        table[col] = np.array(
            [np.nan if getattr(r, attr) is None else getattr(r, attr) for r in traj.records], dtype=float
        )
    return table


def as_table(result) -> dict[str, np.ndarray]:
    """Row table for a ScanResult, a Trajectory or a sequence of trajectories.

    Rows are ordered by (theta, phi, iteration), then by root.
    """
    if isinstance(result, ScanResult):
        return result.table
    trajs: Sequence[Trajectory] = [result] if isinstance(result, Trajectory) else list(result)
    parts = [trajectory_table(t) for t in trajs]
    table = {k: np.concatenate([p[k] for p in parts]) for k in CSV_COLUMNS}
    order = np.lexsort((-table["root_n"], table["iteration"], table["phi"], table["theta"]))
    return {k: v[order] for k, v in table.items()}


def _cell(column: str, value) -> str:
    if column in INT_COLUMNS:
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.12g}"


def csv_text(result) -> str:
    table = as_table(result)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i in range(len(table["iteration"])):
        writer.writerow([_cell(c, table[c][i]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_value(column: str, value):
    if column in INT_COLUMNS:
        return int(value)
    value = float(value)
    return None if math.isnan(value) else value


def json_payload(result, manifest: RunManifest | None) -> dict:
    table = as_table(result)
    rows = [
        {c: _json_value(c, table[c][i]) for c in CSV_COLUMNS}
        for i in range(len(table["iteration"]))
    ]
    payload = {"schema_version": SCHEMA_VERSION, "columns": list(CSV_COLUMNS), "rows": rows}
    if isinstance(result, ScanResult):
        payload["scan"] = {
            "metric": result.metric,
            "axes": {k: [float(x) for x in v] for k, v in result.axes.items()},
            "argmax": result.argmax,
        }
    if manifest is not None:
        payload["manifest"] = manifest.to_dict()
    return payload


def _finish(manifest: RunManifest | None, path: Path, sidecar: bool) -> None:
    if manifest is None:
        return
    if str(path) not in manifest.outputs:
        manifest.outputs.append(str(path))
    if sidecar:
        manifest_path(path).write_text(manifest.dumps() + "\n")


def emit_csv(result, path: str | Path, manifest: RunManifest | None = None) -> Path:
    """Write ``result`` as CSV; the manifest goes to ``<path>.manifest.json``."""
    path = Path(path)
    path.write_text(csv_text(result))
    _finish(manifest, path, sidecar=True)
    return path


def emit_json(result, path: str | Path, manifest: RunManifest | None = None) -> Path:
    """Write ``result`` and its manifest as a single JSON document."""
    path = Path(path)
    _finish(manifest, path, sidecar=False)
    path.write_text(json.dumps(json_payload(result, manifest), indent=1, allow_nan=False) + "\n")
    return path


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def summary_rows(comparison: ThermalComparison) -> list[dict]:
    return [asdict(e) for e in comparison.entries]


def _summary_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def summary_csv_text(comparison: ThermalComparison) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in summary_rows(comparison):
        writer.writerow([_summary_cell(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def emit_summary(comparison: ThermalComparison, path: str | Path, fmt: str, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    if fmt == "csv":
        path.write_text(summary_csv_text(comparison))
        _finish(manifest, path, sidecar=True)
    else:
        _finish(manifest, path, sidecar=False)
        payload = {"schema_version": SCHEMA_VERSION, "columns": list(SUMMARY_COLUMNS), "rows": summary_rows(comparison)}
        if manifest is not None:
            payload["manifest"] = manifest.to_dict()
        path.write_text(json.dumps(payload, indent=1, allow_nan=False) + "\n")
    return path


def provenance_for(configs: Iterable) -> dict[str, list[str]]:
    out = {}
    for cfg in configs:
        out[f"{cfg.n_qubits}q-case{int(cfg.case)}-N{cfg.root}"] = [g.label() for g in cfg.gates()]
    return out


__all__ = [
    "CSV_COLUMNS", "RunManifest", "SCHEMA_VERSION", "as_table", "config_echo", "csv_text",
    "emit_csv", "emit_json", "emit_summary", "json_payload", "manifest_path", "new_manifest",
    "provenance_for", "read_json", "summary_csv_text",
]
