"""Flat ``section.key = value`` configuration files.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Angles accept plain floats or simple multiples of pi (``pi``, ``pi/2``,
``3*pi/4``).  Every key is optional; omitted keys take the defaults in
:data:`DEFAULTS`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from ..protocol import ProtocolConfig
from ..scan import DEFAULT_ROOTS, SCAN_METRICS, ScanGrid
from ..states import QubitHamiltonian, QubitInit, SystemSpec


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, str] = {
    "system.n_qubits": "3",
    "system.case": "1",
    "protocol.root": "15",
    "protocol.iterations": "30",
    "qubit_a.eps1": "0.0",
    "qubit_a.eps2": "1.0",
    "qubit_a.kT": "4.0",
    "qubit_b.eps1": "0.0",
    "qubit_b.eps2": "1.0",
    "qubit_b.kind": "pure",
    "qubit_b.theta": "pi",
    "qubit_b.phi": "pi",
    "qubit_b.kT": "",
    "qubit_b.p": "",
    "qubit_c.eps1": "0.0",
    "qubit_c.eps2": "1.0",
    "qubit_c.kT": "0.4",
    "grid.theta_points": "101",
    "grid.phi_points": "101",
    "grid.phi_fixed": "",
    "grid.p_points": "51",
    "scan.metric": "ergotropy",
    "scan.roots": ",".join(str(n) for n in DEFAULT_ROOTS),
}

_PI_EXPR = re.compile(r"^\s*(?:([-+]?[0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


@dataclass(frozen=True)
class Settings:
    protocol: ProtocolConfig
    grid: ScanGrid
    metric: str
    roots: tuple[int, ...]


def _number(key: str, text: str) -> float:
    m = _PI_EXPR.match(text)
    try:
        if m:
            value = math.pi * float(m.group(1) or 1.0) / float(m.group(2) or 1.0)
        else:
            value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(value) and not (key.endswith(".kT") and value == math.inf):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return value


def _integer(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def read_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _range_error(key: str, value, allowed: str) -> ConfigError:
    return ConfigError(f"{key}={value} out of range; allowed {allowed}")


def build_settings(pairs: Mapping[str, str]) -> Settings:
    unknown = sorted(set(pairs) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    v = {**DEFAULTS, **pairs}

    n_qubits = _integer("system.n_qubits", v["system.n_qubits"])
    if n_qubits not in (2, 3):
        raise _range_error("system.n_qubits", n_qubits, "2 or 3")
    case = _integer("system.case", v["system.case"])
    if case not in (1, 2, 3):
        raise _range_error("system.case", case, "1, 2 or 3")
    root = _integer("protocol.root", v["protocol.root"])
    if root < 1:
        raise _range_error("protocol.root", root, "integers >= 1")
    iterations = _integer("protocol.iterations", v["protocol.iterations"])
    if iterations < 0:
        raise _range_error("protocol.iterations", iterations, "integers >= 0")

    def hamiltonian(q: str) -> QubitHamiltonian:
        e1 = _number(f"{q}.eps1", v[f"{q}.eps1"])
        e2 = _number(f"{q}.eps2", v[f"{q}.eps2"])
        if e1 > e2:
            raise ConfigError(f"{q}.eps1={e1} must not exceed {q}.eps2={e2}")
        return QubitHamiltonian(e1, e2)

    def thermal(q: str) -> QubitInit:
        key = f"{q}.kT"
        if v[key] == "":
            raise ConfigError(f"missing required field {key}")
        kT = _number(key, v[key])
        if kT < 0:
            raise _range_error(key, kT, "[0, inf]")
        return QubitInit.thermal(kT)

    kind = v["qubit_b.kind"]
    if kind == "pure":
        theta = _number("qubit_b.theta", v["qubit_b.theta"])
        phi = _number("qubit_b.phi", v["qubit_b.phi"])
        if not 0.0 <= theta <= math.pi:
            raise _range_error("theta", theta, "[0, pi]")
        if not 0.0 <= phi < 2 * math.pi:
            raise _range_error("phi", phi, "[0, 2*pi)")
        b_init = QubitInit.pure(theta, phi)
    elif kind == "thermal":
        b_init = thermal("qubit_b")
    elif kind == "excited":
        if v["qubit_b.p"] == "":
            raise ConfigError("missing required field qubit_b.p")
        p = _number("qubit_b.p", v["qubit_b.p"])
        if not 0.0 <= p <= 0.5:
            raise _range_error("qubit_b.p", p, "[0, 1/2]")
        b_init = QubitInit.excited_population(p)
    else:
        raise ConfigError(f"qubit_b.kind={kind!r}; allowed pure, thermal, excited")

    qubits = [(hamiltonian("qubit_a"), thermal("qubit_a")), (hamiltonian("qubit_b"), b_init)]
    if n_qubits == 3:
        qubits.append((hamiltonian("qubit_c"), thermal("qubit_c")))
    protocol = ProtocolConfig(SystemSpec(tuple(qubits)), case, root, iterations)

    grid_kw = {}
    for name in ("theta_points", "phi_points", "p_points"):
        n = _integer(f"grid.{name}", v[f"grid.{name}"])
        if n < 1:
            raise _range_error(f"grid.{name}", n, "integers >= 1")
        grid_kw[name] = n
    if v["grid.phi_fixed"] != "":
        phi_fixed = _number("grid.phi_fixed", v["grid.phi_fixed"])
        if not 0.0 <= phi_fixed < 2 * math.pi:
            raise _range_error("grid.phi_fixed", phi_fixed, "[0, 2*pi)")
        grid_kw["phi_fixed"] = phi_fixed
    grid = ScanGrid(**grid_kw)

    metric = v["scan.metric"]
    if metric not in SCAN_METRICS:
        raise ConfigError(f"scan.metric={metric!r}; allowed {', '.join(SCAN_METRICS)}")
    roots = tuple(_integer("scan.roots", r.strip()) for r in v["scan.roots"].split(",") if r.strip())
    if not roots or min(roots) < 1:
        raise ConfigError("scan.roots must list positive integers")
    return Settings(protocol, grid, metric, roots)


def parse_config(path: str | Path | None = None, overrides: Mapping[str, str] | None = None) -> Settings:
    """Read ``path`` (optional), apply ``overrides`` and validate."""
    pairs: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        pairs = read_pairs(text, str(path))
    pairs.update(overrides or {})
    return build_settings(pairs)


def _fmt(x: float) -> str:
    return repr(float(x))


def settings_pairs(settings: Settings) -> dict[str, str]:
    """Key/value form of ``settings`` that :func:`build_settings` maps back exactly."""
    cfg = settings.protocol
    out = dict(DEFAULTS)
    out["system.n_qubits"] = str(cfg.n_qubits)
    out["system.case"] = str(int(cfg.case))
    out["protocol.root"] = str(cfg.root)
    out["protocol.iterations"] = str(cfg.iterations)
    for name, (h, init) in zip(("qubit_a", "qubit_b", "qubit_c"), cfg.spec.qubits):
        out[f"{name}.eps1"] = _fmt(h.eps1)
        out[f"{name}.eps2"] = _fmt(h.eps2)
        if name != "qubit_b":
            out[f"{name}.kT"] = _fmt(init.kT)
    b = cfg.spec.qubits[1][1]
    out["qubit_b.kind"] = b.kind.value
    out["qubit_b.theta"] = _fmt(b.theta) if b.theta is not None else ""
    out["qubit_b.phi"] = _fmt(b.phi) if b.phi is not None else ""
    out["qubit_b.kT"] = _fmt(b.kT) if b.kT is not None else ""
    out["qubit_b.p"] = _fmt(b.p_excited) if b.p_excited is not None else ""
    g = settings.grid
    out["grid.theta_points"] = str(g.theta_points)
    out["grid.phi_points"] = str(g.phi_points)
    out["grid.phi_fixed"] = "" if g.phi_fixed is None else _fmt(g.phi_fixed)
    out["grid.p_points"] = str(g.p_points)
    out["scan.metric"] = settings.metric
    out["scan.roots"] = ",".join(str(n) for n in settings.roots)
    return out


def emit_config(settings: Settings) -> str:
    lines = ["# nrcg-battery configuration (energies in units of eps_2B, angles in radians)"]
    section = None
    for key, value in settings_pairs(settings).items():
        head = key.split(".", 1)[0]
        if head != section:
            if section is not None:
                lines.append("")
            section = head
        if value == "":
            continue
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
