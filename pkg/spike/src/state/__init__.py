"""Knot state, spline evaluation, initialisation and snapshot I/O."""

from .knot_state import (
    CONSTRAINT_TOL,
    DELTA_MIN,
    KnotState,
    amplitudes_from_nodal,
    check_ordering,
    evaluate,
    initialize,
    kernel_nodal_values,
    max_slope,
    min_gap,
    n_effective,
    redistribute,
    sort_canonicalize,
    spline_mean,
    total_variation,
    uniform_knots,
)
from .io_utils import (
    read_snapshot,
    read_snapshot_csv,
    read_snapshot_yaml,
    sample_spline_csv,
    write_snapshot,
    write_snapshot_csv,
    write_snapshot_yaml,
)

__all__ = [
    "CONSTRAINT_TOL",
    "DELTA_MIN",
    "KnotState",
    "amplitudes_from_nodal",
    "check_ordering",
    "evaluate",
    "initialize",
    "kernel_nodal_values",
    "max_slope",
    "min_gap",
    "n_effective",
    "redistribute",
    "sort_canonicalize",
    "spline_mean",
    "total_variation",
    "uniform_knots",
    "read_snapshot",
    "read_snapshot_csv",
    "read_snapshot_yaml",
    "sample_spline_csv",
    "write_snapshot",
    "write_snapshot_csv",
    "write_snapshot_yaml",
]
