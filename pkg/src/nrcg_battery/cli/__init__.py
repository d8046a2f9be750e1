"""Command-line entry point: ``nrcg-battery <subcommand> [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..protocol import ProtocolConfig, run
from ..scan import (
    SCAN_METRICS,
    ScanGrid,
    cnot_comparison,
    convergence_study,
    cycle_fraction_gap,
    default_threads,
    max_step_jump,
    scan_theta_iterations,
    scan_theta_phi_max,
    thermal_comparison,
)
from .config import ConfigError, Settings, parse_config, read_pairs, settings_pairs
from .emit import csv_text, emit_csv, emit_json, emit_summary, new_manifest, provenance_for, summary_csv_text
from .heatmap import ascii_heatmap, render

SUBCOMMANDS = ("run", "scan", "scan2d", "compare-cnot", "compare-thermal", "converge")


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"{stage} failed: {exc}")
        self.stage = stage


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--case", type=int, choices=(1, 2, 3))
    common.add_argument("--qubits", type=int, help="register size (2 or 3)")
    common.add_argument("--root", type=int, help="gate root N")
    common.add_argument("--iterations", type=int, help="iteration count M")
    common.add_argument("--theta", help="qubit B polar angle in radians (pi expressions allowed)")
    common.add_argument("--phi", help="qubit B phase in radians (pi expressions allowed)")
    common.add_argument("--metric", choices=SCAN_METRICS)
    common.add_argument("--out", help="output file; CSV goes to stdout when omitted")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--preview", action="store_true", help="print an ASCII heatmap")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")

    parser = argparse.ArgumentParser(prog="nrcg-battery", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "single protocol run",
        "scan": "theta x iterations scan at one phi",
        "scan2d": "theta x phi scan of the per-cell maximum over iterations",
        "compare-cnot": "Nth-root circuit against full CNOTs at the best theta",
        "compare-thermal": "pure versus thermal qubit B maxima",
        "converge": "ergotropy over two cycles for several roots",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _overrides(args) -> dict[str, str]:
    out = {}
    if args.case is not None:
        out["system.case"] = str(args.case)
    elif args.command == "converge":
        out["system.case"] = "3"
    if args.qubits is not None:
        out["system.n_qubits"] = str(args.qubits)
    if args.root is not None:
        out["protocol.root"] = str(args.root)
    if args.iterations is not None:
        out["protocol.iterations"] = str(args.iterations)
    if args.theta is not None:
        out["qubit_b.theta"] = args.theta
    if args.phi is not None:
        out["qubit_b.phi"] = args.phi
        if args.command == "scan":
            out["grid.phi_fixed"] = args.phi
    if args.metric is not None:
        out["scan.metric"] = args.metric
    return out


def _load(args) -> Settings:
    overrides = _overrides(args)
    if args.command == "converge" and args.case is None and args.config:
        # an explicit case in the file wins over the converge default
        if "system.case" in read_pairs(Path(args.config).read_text(), args.config):
            overrides.pop("system.case")
    return parse_config(args.config, overrides)


def _write(result, args, manifest, out) -> None:
    if args.out is None:
        out.write(csv_text(result))
        return
    if args.format == "csv":
        emit_csv(result, args.out, manifest)
    else:
        emit_json(result, args.out, manifest)


def _trajectory_preview(trajs, metric: str) -> str:
    field = {
        "delta_w": "ergotropy_variation",
        "ratio": "ergotropy_ratio",
        "fom": "figure_of_merit",
    }.get(metric, metric)
    lines = []
    for t in trajs:
        values = np.array([np.nan if getattr(r, field) is None else getattr(r, field) for r in t.records])
        its = [r.iteration for r in t.records]
        lines.append(render(values[:, None], "iteration", its, f"N={t.config.root}", [t.config.root], title=metric))
    return "\n".join(lines)


def execute(args, out=None) -> int:
    out = out or sys.stdout
    try:
        settings = _load(args)
    except (ConfigError, OSError, ValueError) as exc:
        raise StageError("config", exc) from exc
    cfg: ProtocolConfig = settings.protocol
    threads = args.threads if args.threads is not None else default_threads()
    pairs = settings_pairs(settings)
    try:
        if args.command == "run":
            result = run(cfg)
            configs = [cfg]
        elif args.command == "scan":
            result = scan_theta_iterations(cfg, settings.grid, settings.metric, threads)
            configs = [cfg]
        elif args.command == "scan2d":
            result = scan_theta_phi_max(cfg, settings.grid, settings.metric, threads)
            configs = [cfg]
        elif args.command == "compare-cnot":
            cmp = cnot_comparison(cfg, settings.grid, threads)
            result = [cmp.nrcg, cmp.cnot]
            configs = [cmp.nrcg.config, cmp.cnot.config]
        elif args.command == "compare-thermal":
            result = thermal_comparison(cfg, settings.grid, threads)
            configs = []
        else:
            trajs = convergence_study(cfg, settings.roots)
            result = list(trajs.values())
            configs = [t.config for t in result]
    except (ValueError, RuntimeError) as exc:
        raise StageError("compute", exc) from exc

    extra = {}
    if args.command == "compare-cnot":
        extra = {"theta_star": cmp.theta_star, "phi": cmp.phi}
        print(f"theta* = {cmp.theta_star:.6f} rad (phi = {cmp.phi:.6f})", file=sys.stderr)
    if args.command == "converge":
        extra = {
            "max_step_jump": {str(n): max_step_jump(t) for n, t in trajs.items()},
        }
        roots = sorted(trajs)
        if len(roots) > 1:
            extra["cycle_fraction_gap_last_two"] = cycle_fraction_gap(trajs[roots[-2]], trajs[roots[-1]])
    provenance = (
        result.metadata["gate_sequences"] if args.command == "compare-thermal" else provenance_for(configs)
    )
    manifest = new_manifest(args.command, pairs, provenance, extra)

    try:
        if args.command == "compare-thermal":
            if args.out is None:
                out.write(summary_csv_text(result))
            else:
                emit_summary(result, args.out, args.format, manifest)
        else:
            _write(result, args, manifest, out)
        if args.preview:
            if args.command in ("scan", "scan2d"):
                print(ascii_heatmap(result, settings.metric), file=sys.stderr if args.out is None else out)
            elif args.command != "compare-thermal":
                trajs_ = [result] if args.command == "run" else result
                print(_trajectory_preview(trajs_, settings.metric), file=sys.stderr if args.out is None else out)
    except (OSError, ValueError) as exc:
        raise StageError("emit", exc) from exc
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return execute(args)
    except StageError as exc:
        print(f"nrcg-battery {args.command}: {exc}", file=sys.stderr)
        return 2 if exc.stage == "config" else 1


__all__ = ["main", "execute", "build_parser", "SUBCOMMANDS"]
