"""
Time-ordered snapshots of a run and their on-disk layout.

A trajectory directory holds ``index.csv`` (one row of diagnostics per
snapshot) and ``snapshots/snapshot_<k>.<fmt>``.
"""
import csv
import os
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.state import KnotState, read_snapshot, write_snapshot

INDEX_FILE = "index.csv"
SNAPSHOT_DIR = "snapshots"


@dataclass(frozen=True, eq=False)
class SnapshotDiagnostics:
    """
    Attributes:
        time: Snapshot time
        n_eff: Effective knot count 1 / sum(gap^2)
        spline_mean: Spatial average of the spline, shape (d,)
        max_pos_rate: max_i |xdot_i| at the snapshot
        min_gap: Smallest knot gap
        steps: Accepted steps so far
        rejected: Rejected steps so far
        redistributions: Redistributions so far
    """

    time: float
    n_eff: float
    spline_mean: np.ndarray
    max_pos_rate: float
    min_gap: float
    steps: int
    rejected: int
    redistributions: int


@dataclass
class Trajectory:
    snapshots: List[KnotState] = field(default_factory=list)
    diagnostics: List[SnapshotDiagnostics] = field(default_factory=list)

    def append(self, state: KnotState, diagnostics: SnapshotDiagnostics) -> None:
        """
        Raises:
            ValueError: If the snapshot time does not increase
        """
        if self.snapshots and state.time <= self.snapshots[-1].time:
            raise ValueError(
                f"Snapshot times must increase strictly, got {state.time} after {self.snapshots[-1].time}"
            )
        self.snapshots.append(state)
        self.diagnostics.append(diagnostics)

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def times(self) -> np.ndarray:
        return np.array([state.time for state in self.snapshots])

    @property
    def final(self) -> KnotState:
        return self.snapshots[-1]

    @property
    def n_eff_history(self) -> np.ndarray:
        return np.array([d.n_eff for d in self.diagnostics])

    def mean_drift(self) -> float:
        """Largest deviation of the spline mean from its initial value."""
        if not self.diagnostics:
            return 0.0
        means = np.array([d.spline_mean for d in self.diagnostics])
        return float(np.abs(means - means[0]).max())


def _index_header(dim: int) -> List[str]:
    return (
        ["index", "time", "file", "n_eff"]
        + [f"mean_{k}" for k in range(dim)]
        + ["max_pos_rate", "min_gap", "steps", "rejected", "redistributions"]
    )


def write_trajectory(trajectory: Trajectory, out_dir: str, fmt: str = "yaml") -> None:
    """Write one snapshot file per recorded time plus the index CSV."""
    os.makedirs(os.path.join(out_dir, SNAPSHOT_DIR), exist_ok=True)
    if not trajectory.snapshots:
        raise ValueError("Cannot write an empty trajectory")
    dim = trajectory.snapshots[0].dim
    with open(os.path.join(out_dir, INDEX_FILE), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(_index_header(dim))
        for k, (state, diag) in enumerate(zip(trajectory.snapshots, trajectory.diagnostics)):
            name = os.path.join(SNAPSHOT_DIR, f"snapshot_{k:05d}.{fmt}")
            write_snapshot(state, os.path.join(out_dir, name), fmt)
            writer.writerow(
                [k, repr(float(state.time)), name, repr(diag.n_eff)]
                + [repr(float(v)) for v in diag.spline_mean]
                + [repr(diag.max_pos_rate), repr(diag.min_gap), diag.steps, diag.rejected, diag.redistributions]
            )


def read_trajectory(out_dir: str) -> Trajectory:
    """
    Raises:
        FileNotFoundError: If the directory has no index file
    """
    index_path = os.path.join(out_dir, INDEX_FILE)
    if not os.path.exists(index_path):
        raise FileNotFoundError(f"Trajectory index not found: {index_path}")
    trajectory = Trajectory()
    with open(index_path, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            state = read_snapshot(os.path.join(out_dir, row["file"]))
            means = [float(row[key]) for key in row if key.startswith("mean_")]
            trajectory.append(
                state,
                SnapshotDiagnostics(
                    time=float(row["time"]),
                    n_eff=float(row["n_eff"]),
                    spline_mean=np.array(means),
                    max_pos_rate=float(row["max_pos_rate"]),
                    min_gap=float(row["min_gap"]),
                    steps=int(row["steps"]),
                    rejected=int(row["rejected"]),
                    redistributions=int(row["redistributions"]),
                ),
            )
    return trajectory
