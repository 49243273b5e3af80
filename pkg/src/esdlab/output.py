"""CSV trajectory and JSON sweep files, plus readers for both.

Formatting is fixed (no timestamps, fixed float format, fixed key order) so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Optional

import numpy as np

from .analysis import DarkPeriod, SweepGrid, Trajectory, dark_runs

CSV_COLUMNS = ("t", "c_wootters", "c_paper", "e_h0", "e_hI", "purity")


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12e}"


def _meta_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trajectory_metadata(traj: Trajectory, extra: Optional[dict] = None) -> dict:
    meta = {**traj.model.metadata(), "source": traj.source, "samples": len(traj)}
    if len(traj):
        meta["t_min"] = float(traj.times[0])
        meta["t_max"] = float(traj.times[-1])
    if traj.cutoff is not None:
        meta["fock_cutoff"] = traj.cutoff
    meta.update(extra or {})
    return meta


def trajectory_csv_text(traj: Trajectory, metadata: Optional[dict] = None) -> str:
    lines = [f"# {k}={_meta_value(v)}" for k, v in (metadata or trajectory_metadata(traj)).items()]
    lines.append(",".join(CSV_COLUMNS))
    cols = (traj.times, traj.c_wootters, traj.c_paper, traj.e_h0, traj.e_hI, traj.purity)
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_trajectory_csv(traj: Trajectory, path, metadata: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trajectory_csv_text(traj, metadata))


def read_trajectory_csv(path) -> tuple[dict, dict]:
    """Return ``(metadata, columns)``; metadata values stay strings."""
    meta, rows, header = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(len(rows), len(header or CSV_COLUMNS))
    return meta, {name: data[:, i] for i, name in enumerate(header or CSV_COLUMNS)}


def run_length_encode(mask_row: Iterable[bool]) -> list:
    """``[[start, length], ...]`` for the True runs of a boolean row."""
    runs = []
    start = None
    row = list(mask_row)
    for i, v in enumerate(row):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append([start, i - start])
            start = None
    if start is not None:
        runs.append([start, len(row) - start])
    return runs


def run_length_decode(runs: list, width: int) -> np.ndarray:
    row = np.zeros(width, dtype=bool)
    for start, length in runs:
        row[start:start + length] = True
    return row


def row_dark_periods(grid: SweepGrid, min_width: int = 2) -> list:
    """Sample-resolution dark periods of every row of a sweep."""
    t = grid.x_values
    out = []
    for row in grid.values:
        periods = []
        for i0, i1 in dark_runs(row, grid.zero_tol, min_width):
            revived = bool(np.any(row[i1 + 1:] > grid.zero_tol))
            periods.append(DarkPeriod(float(t[i0]), float(t[i1]), revived, i0, i1))
        out.append(periods)
    return out


def _period_dict(p: DarkPeriod) -> dict:
    return {"t_start": p.t_start, "t_end": p.t_end, "revived": p.revived,
            "i_start": p.i_start, "i_end": p.i_end}


def sweep_document(grid: SweepGrid, dark_periods: Optional[list] = None) -> dict:
    if dark_periods is None:
        dark_periods = row_dark_periods(grid)
    return {
        "preset": grid.preset,
        "variant": grid.variant,
        "source": grid.source,
        "zero_tol": grid.zero_tol,
        "params": {k: grid.params[k] for k in sorted(grid.params)},
        "x_axis": {"name": grid.x_name, "values": [float(v) for v in grid.x_values]},
        "y_axis": {"name": grid.y_name, "values": [float(v) for v in grid.y_values]},
        "shape": [int(grid.values.shape[0]), int(grid.values.shape[1])],
        "values": [[float(v) for v in row] for row in grid.values],
        "dark_fraction": grid.dark_fraction,
        "dark_mask_rle": [run_length_encode(row) for row in grid.dark_mask],
        "dark_periods": [[_period_dict(p) for p in row] for row in dark_periods],
    }


def sweep_json_text(grid: SweepGrid, dark_periods: Optional[list] = None) -> str:
    return json.dumps(sweep_document(grid, dark_periods), indent=1) + "\n"


def emit_sweep_json(grid: SweepGrid, path, dark_periods: Optional[list] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(sweep_json_text(grid, dark_periods))


def read_sweep_json(path) -> dict:
    """Load a sweep document and add decoded ``values`` and ``dark_mask`` arrays."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    ny, nx = doc["shape"]
    doc["values"] = np.array(doc["values"], dtype=float).reshape(ny, nx)
    doc["dark_mask"] = np.array([run_length_decode(r, nx) for r in doc["dark_mask_rle"]],
                                dtype=bool).reshape(ny, nx)
    return doc
