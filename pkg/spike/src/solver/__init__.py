"""Linear-time rate solver and its dense verification path."""

from .block_system import (
    CONDITION_LIMIT,
    DENSE_FALLBACK_MAX_N,
    BlockSystem,
    expand_dense,
    solve_block_system,
)
from .fast_solver import (
    IntervalFluxes,
    RateVector,
    RegularizationParams,
    assemble_system,
    characteristic_deviation,
    compute_fhat,
    compute_rates,
    recover_rates,
    write_rate_diagnostics,
)
from .dense_check import DenseResidual, flux_moments, verify_dense

__all__ = [
    "CONDITION_LIMIT",
    "DENSE_FALLBACK_MAX_N",
    "BlockSystem",
    "DenseResidual",
    "IntervalFluxes",
    "RateVector",
    "RegularizationParams",
    "assemble_system",
    "characteristic_deviation",
    "compute_fhat",
    "compute_rates",
    "expand_dense",
    "flux_moments",
    "recover_rates",
    "solve_block_system",
    "verify_dense",
    "write_rate_diagnostics",
]
