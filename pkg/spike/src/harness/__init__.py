"""Experiment configs, presets, initial conditions and run orchestration."""

from .initial_conditions import (
    INITIAL_CONDITIONS,
    InitialCondition,
    create_initial_condition,
    describe_initial_condition,
)
from .experiment import (
    ExperimentConfig,
    ReferenceSettings,
    ShockSettings,
    ZigzagSettings,
    compare,
    detect_shock,
    dump_failure_state,
    error_table,
    fv_reference,
    load_experiment,
    run_experiment,
    run_zigzag_sweep,
    sweep,
    write_error_csv,
    write_summary,
)

__all__ = [
    "INITIAL_CONDITIONS",
    "ExperimentConfig",
    "InitialCondition",
    "ReferenceSettings",
    "ShockSettings",
    "ZigzagSettings",
    "compare",
    "create_initial_condition",
    "describe_initial_condition",
    "detect_shock",
    "dump_failure_state",
    "error_table",
    "fv_reference",
    "load_experiment",
    "run_experiment",
    "run_zigzag_sweep",
    "sweep",
    "write_error_csv",
    "write_summary",
]
