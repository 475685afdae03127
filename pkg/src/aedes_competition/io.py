"""CSV and PGM writers for trajectories, diagnostics and profiles."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .simulator import Diagnostics, Trajectory

DIAGNOSTIC_COLUMNS = ("t", "segregation", "supF1", "supF2", "front")


def _save(path, header, table) -> Path:
    path = Path(path)
    np.savetxt(path, table, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    return path


def write_snapshots(path, traj: Trajectory) -> Path:
    """Long format: one row per (snapshot, node)."""
    names = ("w", "F1", "F2") if "w" in traj.data else ("E1", "F1", "E2", "F2")
    n_t, n_x = len(traj.times), len(traj.x)
    cols = [np.repeat(traj.times, n_x), np.tile(traj.x, n_t)]
    cols += [traj[k].reshape(-1) for k in names]
    return _save(path, ("t", "x") + names, np.column_stack(cols))


def write_diagnostics(path, diag: Diagnostics) -> Path:
    arr = diag.arrays()
    return _save(path, DIAGNOSTIC_COLUMNS, np.column_stack([arr[k] for k in DIAGNOSTIC_COLUMNS]))


def write_profile(path, x, values) -> Path:
    return _save(path, ("x", "value"), np.column_stack([np.asarray(x, float), np.asarray(values, float)]))


def read_csv(path):
    """Header names and data columns of a file written above."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_pgm(path, field: np.ndarray) -> Path:
    """Binary 8-bit greymap, one row per snapshot, black = 0, white = field max."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise ValueError("heatmap needs a (snapshots, nodes) array")
    top = float(np.max(field)) if field.size else 0.0
    scaled = np.zeros(field.shape) if top <= 0 else np.clip(field, 0.0, None) / top
    pixels = np.round(255 * scaled).astype(np.uint8)
    rows, cols = pixels.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    # header: magic, width, height, maxval, then exactly one whitespace byte
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None:
        raise ValueError("not a binary PGM file")
    cols, rows, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError("only 8-bit PGM supported")
    return np.frombuffer(raw[m.end():m.end() + rows * cols], dtype=np.uint8).reshape(rows, cols)
