"""
Comparing knot states with reference grids, shock tracking on reference
runs and the CSV layout of reference directories.
"""
import csv
import os
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.errors import NoShockDetectedError, TimeMismatchError
from src.kernel import frac
from src.reference.fv_solver import FvGrid
from src.state import KnotState, evaluate

TIME_TOLERANCE = 1e-9
INDEX_FILE = "index.csv"


@dataclass(frozen=True, eq=False)
class L1Error:
    """Per-component absolute and relative L1 errors, each of shape (d,)."""

    absolute: np.ndarray
    relative: np.ndarray


def _check_time(state: KnotState, grid: FvGrid) -> None:
    if abs(state.time - grid.time) > TIME_TOLERANCE:
        raise TimeMismatchError(f"State at t={state.time!r} compared with reference at t={grid.time!r}")


def cell_errors(state: KnotState, grid: FvGrid) -> np.ndarray:
    """|q(center) - average| per cell and component, shape (M, d)."""
    _check_time(state, grid)
    return np.abs(evaluate(state, grid.centers) - grid.averages)


def l1_error(state: KnotState, grid: FvGrid) -> L1Error:
    """
    Sum over cells of |q(center) - average| dx, and the same divided by sum |average| dx.

    Raises:
        TimeMismatchError: If the time stamps differ by more than TIME_TOLERANCE
    """
    absolute = cell_errors(state, grid).sum(axis=0) * grid.dx
    norm = np.abs(grid.averages).sum(axis=0) * grid.dx
    relative = np.divide(absolute, norm, out=np.zeros_like(absolute), where=norm > 0.0)
    return L1Error(absolute=absolute, relative=relative)


def grid_l1_difference(first: FvGrid, second: FvGrid) -> np.ndarray:
    """
    L1 distance of two grids with equal cell counts, per component.

    Raises:
        ValueError: If the cell counts differ
    """
    if first.cells != second.cells:
        raise ValueError(f"Grids have {first.cells} and {second.cells} cells")
    return np.abs(first.averages - second.averages).sum(axis=0) * first.dx


def shock_localized_fraction(
    state: KnotState, grid: FvGrid, shock_positions: Sequence[float], fraction: float = 0.05
) -> float:
    """
    Share of the L1 error mass within the ``fraction`` of cells nearest any shock.

    Returns 1.0 for an error-free state.
    """
    if not shock_positions:
        raise ValueError("At least one shock position is required")
    per_cell = cell_errors(state, grid).sum(axis=1)
    total = per_cell.sum()
    if total == 0.0:
        return 1.0
    offsets = grid.centers[:, None] - np.asarray(shock_positions, dtype=float)[None, :]
    distance = np.abs(frac(offsets + 0.5) - 0.5).min(axis=1)
    count = max(1, int(np.ceil(fraction * grid.cells)))
    nearest = np.argsort(distance, kind="stable")[:count]
    return float(per_cell[nearest].sum() / total)


@dataclass(frozen=True, eq=False)
class FvShockTrack:
    times: np.ndarray
    positions: np.ndarray
    speed: float


def locate_fv_shock(grid: FvGrid, component: int = 0, half_width: int = 2) -> float:
    """Centroid of |jump| over the interfaces around the largest jump, in [0, 1)."""
    values = grid.averages[:, component]
    jumps = np.abs(np.roll(values, -1) - values)
    k = int(np.argmax(jumps))
    offsets = np.arange(-half_width, half_width + 1)
    weights = jumps[(k + offsets) % grid.cells]
    # interface j + 1/2 sits at (j + 1) dx
    positions = (k + offsets + 1) * grid.dx
    return float(frac(np.dot(weights, positions) / weights.sum()))


def track_fv_shock(grids: Sequence[FvGrid], window: Sequence[float], component: int = 0) -> FvShockTrack:
    """
    Shock positions over a time window and their least-squares speed.

    Raises:
        NoShockDetectedError: If fewer than two grids fall into the window
    """
    t_start, t_end = window
    selected = [grid for grid in grids if t_start <= grid.time <= t_end]
    if len(selected) < 2:
        raise NoShockDetectedError(f"Need two reference grids in [{t_start}, {t_end}], got {len(selected)}")
    times = np.array([grid.time for grid in selected])
    positions = np.array([locate_fv_shock(grid, component) for grid in selected])
    speed = float(np.polyfit(times, np.unwrap(positions, period=1.0), 1)[0])
    return FvShockTrack(times=times, positions=positions, speed=speed)


def write_fv_csv(grid: FvGrid, path: str) -> None:
    """Cell centres and averages; the time goes into a leading ``#`` line."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# time={grid.time!r}\n")
        writer = csv.writer(f)
        writer.writerow(["x"] + [f"q_{k}" for k in range(grid.dim)])
        for x, q in zip(grid.centers, grid.averages):
            writer.writerow([repr(float(x))] + [repr(float(v)) for v in q])


def read_fv_csv(path: str) -> FvGrid:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Reference file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = f.readlines()
    time = float(lines[0].strip().lstrip("#").strip().partition("=")[2])
    rows = list(csv.reader(lines[2:]))
    table = np.asarray(rows, dtype=float).reshape(len(rows), -1)
    return FvGrid(averages=table[:, 1:], time=time)


def write_reference_dir(grids: Sequence[FvGrid], out_dir: str) -> None:
    """index.csv listing (index, time, cells, file) plus one CSV per grid."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, INDEX_FILE), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "time", "cells", "file"])
        for k, grid in enumerate(grids):
            name = f"reference_{k:05d}.csv"
            write_fv_csv(grid, os.path.join(out_dir, name))
            writer.writerow([k, repr(float(grid.time)), grid.cells, name])


def read_reference_dir(out_dir: str) -> List[FvGrid]:
    index_path = os.path.join(out_dir, INDEX_FILE)
    if not os.path.exists(index_path):
        raise FileNotFoundError(f"Reference index not found: {index_path}")
    with open(index_path, encoding="utf-8", newline="") as f:
        return [read_fv_csv(os.path.join(out_dir, row["file"])) for row in csv.DictReader(f)]
