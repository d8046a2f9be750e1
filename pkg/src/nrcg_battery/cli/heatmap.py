"""Terminal preview of a 2-D scan."""
from __future__ import annotations

import math

import numpy as np

from ..scan import ScanResult

RAMP = " .:-=+*#%@"


def _ramp_indices(values: np.ndarray) -> np.ndarray:
    finite = np.isfinite(values)
    if not finite.any():
        return np.full(values.shape, -1)
    lo, hi = np.min(values[finite]), np.max(values[finite])
    if hi == lo:
        idx = np.zeros(values.shape, dtype=int)
    else:
        # floor, so only cells equal to the maximum reach the last character
        with np.errstate(invalid="ignore"):
            scaled = np.where(finite, (values - lo) / (hi - lo) * (len(RAMP) - 1), 0.0)
        idx = np.clip(np.floor(scaled).astype(int), 0, len(RAMP) - 1)
    return np.where(finite, idx, -1)


def render(values, x_name: str, x_axis, y_name: str, y_axis, title: str = "") -> str:
    """Character map with ``x`` across and ``y`` down (first y value on top)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"heatmap needs 2-D data, got shape {values.shape}")
    grid = _ramp_indices(values.T)
    finite = values[np.isfinite(values)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (math.nan, math.nan)
    y_axis = np.asarray(y_axis)
    x_axis = np.asarray(x_axis)
    labels = [f"{y:.3g}" for y in y_axis]
    width = max(len(s) for s in labels)
    lines = []
    if title:
        lines.append(title)
    lines.append(f"range {lo:.4g} .. {hi:.4g}   ramp '{RAMP}'")
    for row, label in zip(grid, labels):
        chars = "".join("?" if k < 0 else RAMP[k] for k in row)
        lines.append(f"{label:>{width}} |{chars}|")
    lines.append(" " * width + " +" + "-" * grid.shape[1] + "+")
    lines.append(f"{' ' * width}  {x_name}: {x_axis[0]:.3g} .. {x_axis[-1]:.3g}   (rows: {y_name} {y_axis[0]:.3g} .. {y_axis[-1]:.3g})")
    return "\n".join(lines)


def ascii_heatmap(result: ScanResult, metric: str | None = None) -> str:
    """Render a scan; ``metric`` may pick another column of a theta x iteration scan."""
    names = list(result.axes)
    if len(names) != 2:
        raise ValueError("heatmap needs a 2-D scan result")
    values = result.values
    metric = metric or result.metric
    if metric != result.metric:
        if names != ["theta", "iteration"]:
            raise ValueError("only theta x iteration scans can be re-rendered with another metric")
        values = np.asarray(result.table[metric], dtype=float).reshape(values.shape)
    x_name, y_name = names
    return render(values, x_name, result.axes[x_name], y_name, result.axes[y_name], title=metric)
