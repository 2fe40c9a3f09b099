"""Time stepping, trajectories and shock diagnostics."""

from .runge_kutta import (
    CLASSICAL_RK4,
    DORMAND_PRINCE,
    TABLEAUX,
    Tableau,
    error_norm,
    get_tableau,
    next_step_size,
    rk_step,
)
from .trajectory import SnapshotDiagnostics, Trajectory, read_trajectory, write_trajectory
from .integrator import DT_MIN, IntegratorConfig, make_rhs, run, snapshot_times, step
from .shock import (
    ShockLocation,
    ShockReport,
    locate_shock,
    rankine_hugoniot_residual,
    shock_diagnostics,
    shock_positions,
)

__all__ = [
    "CLASSICAL_RK4",
    "DORMAND_PRINCE",
    "DT_MIN",
    "TABLEAUX",
    "IntegratorConfig",
    "ShockLocation",
    "ShockReport",
    "SnapshotDiagnostics",
    "Tableau",
    "Trajectory",
    "error_norm",
    "get_tableau",
    "locate_shock",
    "make_rhs",
    "next_step_size",
    "rankine_hugoniot_residual",
    "read_trajectory",
    "rk_step",
    "run",
    "shock_diagnostics",
    "shock_positions",
    "snapshot_times",
    "step",
    "write_trajectory",
]
