"""Exact and reduced dynamics of the two-kernel zigzag."""

from .zigzag_lab import (
    BLOWUP_AMPLITUDE,
    ReducedRates,
    SweepRow,
    ZigzagComparison,
    ZigzagParams,
    ZigzagSeries,
    chain_rule_H_dot,
    compare_full_solver,
    exact_profile,
    exact_zigzag,
    hitting_time_closed_form,
    integrate_reduced,
    lambda_sweep,
    reduced_rates,
    write_sweep_csv,
    zigzag_state,
)

__all__ = [
    "BLOWUP_AMPLITUDE",
    "ReducedRates",
    "SweepRow",
    "ZigzagComparison",
    "ZigzagParams",
    "ZigzagSeries",
    "chain_rule_H_dot",
    "compare_full_solver",
    "exact_profile",
    "exact_zigzag",
    "hitting_time_closed_form",
    "integrate_reduced",
    "lambda_sweep",
    "reduced_rates",
    "write_sweep_csv",
    "zigzag_state",
]
