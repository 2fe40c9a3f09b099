"""Finite-volume reference runs and comparison with knot states."""

from .fv_solver import (
    MAX_CFL,
    MIN_CELLS,
    FvGrid,
    cell_averages,
    flux_divergence,
    fv_run,
    max_wave_speed,
    restrict,
    rusanov_flux,
    ssp_rk2_step,
)
from .cache import CACHE_VERSION, cache_directory, cached_fv_run, reference_key
from .comparison import (
    FvShockTrack,
    L1Error,
    cell_errors,
    grid_l1_difference,
    l1_error,
    locate_fv_shock,
    read_fv_csv,
    read_reference_dir,
    shock_localized_fraction,
    track_fv_shock,
    write_fv_csv,
    write_reference_dir,
)

__all__ = [
    "CACHE_VERSION",
    "MAX_CFL",
    "MIN_CELLS",
    "FvGrid",
    "FvShockTrack",
    "L1Error",
    "cache_directory",
    "cached_fv_run",
    "cell_averages",
    "cell_errors",
    "flux_divergence",
    "fv_run",
    "grid_l1_difference",
    "l1_error",
    "locate_fv_shock",
    "max_wave_speed",
    "read_fv_csv",
    "read_reference_dir",
    "reference_key",
    "restrict",
    "rusanov_flux",
    "shock_localized_fraction",
    "ssp_rk2_step",
    "track_fv_shock",
    "write_fv_csv",
    "write_reference_dir",
]
