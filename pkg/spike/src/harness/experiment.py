"""
Experiment orchestration: build everything a config names, run it and write
the artifacts of a run directory.

A SPIKE run directory holds ``trajectory/`` (index CSV plus snapshots),
``final_profile.csv``, ``summary.yaml`` and, with the reference enabled,
``reference/`` and ``errors.csv``. A zigzag run directory holds
``zigzag_sweep.csv``, ``zigzag_unregularised.csv`` and ``summary.yaml``.
"""
import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from omegaconf import DictConfig, OmegaConf
from tqdm import tqdm

from src.errors import ConfigError, NoShockDetectedError, SpikeError, TimeMismatchError
from src.flux import BaseFlux, create_flux
from src.harness.initial_conditions import InitialCondition, create_initial_condition, describe_initial_condition
from src.integration import (
    IntegratorConfig,
    ShockReport,
    Trajectory,
    rankine_hugoniot_residual,
    read_trajectory,
    run,
    shock_diagnostics,
    shock_positions,
    snapshot_times,
    write_trajectory,
)
from src.reference import (
    FvGrid,
    cached_fv_run,
    l1_error,
    read_reference_dir,
    shock_localized_fraction,
    track_fv_shock,
    write_reference_dir,
)
from src.solver import RegularizationParams
from src.state import KnotState, initialize, sample_spline_csv, write_snapshot_yaml
from src.utils.config import apply_overrides, load_preset, read_config, validate_config, with_defaults
from src.zigzag import integrate_reduced, lambda_sweep, write_sweep_csv

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.yaml"
FAILURE_FILE = "failure_state.yaml"
ERRORS_FILE = "errors.csv"


@dataclass(frozen=True)
class ReferenceSettings:
    enabled: bool = False
    cells: int = 4000
    cfl: float = 0.4


@dataclass(frozen=True)
class ShockSettings:
    window: Optional[Tuple[float, float]] = None
    threshold_factor: float = 10.0
    cluster_gap_factor: float = 0.1


@dataclass(frozen=True)
class ZigzagSettings:
    H0: float = 1.0
    delta0: float = 0.25
    lambdas: Tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5)
    t_end: float = 1.0
    n_out: int = 101
    rel_tol: float = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything one experiment needs, built from a validated config.

    Attributes:
        name: Experiment name, used in logs and the summary
        kind: ``spike`` for a solver run, ``zigzag`` for the reduced lambda sweep
        model: Model section (name, gamma)
        initial_condition: Initial-condition section (name, params)
        n: Number of knots
        reg: Regularisation weights
        integrator: Time integration settings
        reference: Finite-volume reference settings
        output_dir: Run directory
        snapshot_format: yaml or csv
        diagnostics_dump: Write per-step rate CSVs under ``<output_dir>/rates``
        shock: Shock detection settings
        zigzag: Reduced zigzag sweep settings
    """

    name: str
    kind: str
    model: Dict[str, Any]
    initial_condition: Dict[str, Any]
    n: int
    reg: RegularizationParams
    integrator: IntegratorConfig
    reference: ReferenceSettings
    output_dir: str
    snapshot_format: str = "yaml"
    diagnostics_dump: bool = False
    shock: ShockSettings = field(default_factory=ShockSettings)
    zigzag: ZigzagSettings = field(default_factory=ZigzagSettings)

    @classmethod
    def from_config(cls, cfg: Any) -> "ExperimentConfig":
        """
        Raises:
            ConfigError: If the config fails validation
        """
        if not isinstance(cfg, DictConfig):
            cfg = OmegaConf.create(cfg)
        plain = validate_config(with_defaults(cfg))
        try:
            integrator = IntegratorConfig(**plain["integrator"])
        except ValueError as e:
            raise ConfigError(f"Invalid config at 'integrator': {e}") from e
        solver = plain["solver"]
        shock = plain["shock"]
        zigzag = plain["zigzag"]
        return cls(
            name=plain["experiment"]["name"],
            kind=plain["experiment"]["kind"],
            model=plain["model"],
            initial_condition=plain["initial_condition"],
            n=int(solver["n"]),
            reg=RegularizationParams(
                float(solver["lambda_a"]), float(solver["lambda_x"]), float(solver["lambda_b"])
            ),
            integrator=integrator,
            reference=ReferenceSettings(**plain["reference"]),
            output_dir=plain["output"]["dir"],
            snapshot_format=plain["output"]["snapshot_format"],
            diagnostics_dump=plain["output"]["diagnostics_dump"],
            shock=ShockSettings(
                window=tuple(shock["window"]) if shock["window"] is not None else None,
                threshold_factor=float(shock["threshold_factor"]),
                cluster_gap_factor=float(shock["cluster_gap_factor"]),
            ),
            zigzag=ZigzagSettings(**{**zigzag, "lambdas": tuple(float(lam) for lam in zigzag["lambdas"])}),
        )

    def build_model(self) -> BaseFlux:
        return create_flux({"model": self.model})

    def build_initial_condition(self) -> InitialCondition:
        return create_initial_condition({"initial_condition": self.initial_condition, "model": self.model})

    @property
    def ic_description(self) -> Dict[str, Any]:
        return describe_initial_condition({"initial_condition": self.initial_condition, "model": self.model})


def load_experiment(
    config_path: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build an experiment from a preset or a config file plus CLI overrides.

    Raises:
        ValueError: If both or neither of config_path and preset are given, or the
            preset is unknown
        ConfigError: If the merged config fails validation
    """
    if (config_path is None) == (preset is None):
        raise ValueError("Give exactly one of a config file and a preset")
    cfg = load_preset(preset) if preset is not None else read_config(config_path)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return ExperimentConfig.from_config(cfg)


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to built-in types for YAML output."""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_summary(summary: Dict[str, Any], out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, SUMMARY_FILE)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(_plain(summary), f, sort_keys=False)
    return path


def dump_failure_state(state: KnotState, out_dir: str) -> str:
    path = os.path.join(out_dir, FAILURE_FILE)
    write_snapshot_yaml(state, path)
    logger.error(f"Last accepted state written to {path}")
    return path


def error_table(trajectory: Trajectory, grids: Sequence[FvGrid]) -> List[Dict[str, Any]]:
    """
    One row (t, l1, rel) per snapshot; snapshots and grids pair up in order.

    Raises:
        TimeMismatchError: If the counts or any pair of times differ
    """
    if len(grids) != len(trajectory):
        raise TimeMismatchError(f"Trajectory has {len(trajectory)} snapshots, reference has {len(grids)} grids")
    rows = []
    for state, grid in zip(trajectory.snapshots, grids):
        error = l1_error(state, grid)
        rows.append({"t": state.time, "l1": error.absolute, "rel": error.relative})
    return rows


def write_error_csv(rows: Sequence[Dict[str, Any]], path: str) -> None:
    """Columns t, l1_<k>, rel_<k> per component."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    dim = len(rows[0]["l1"]) if rows else 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t"] + [f"l1_{k}" for k in range(dim)] + [f"rel_{k}" for k in range(dim)])
        for row in rows:
            writer.writerow(
                [repr(float(row["t"]))]
                + [repr(float(v)) for v in row["l1"]]
                + [repr(float(v)) for v in row["rel"]]
            )


def detect_shock(trajectory: Trajectory, settings: ShockSettings) -> Optional[ShockReport]:
    window = settings.window or (float(trajectory.times[0]), float(trajectory.times[-1]))
    try:
        return shock_diagnostics(
            trajectory,
            window,
            threshold_factor=settings.threshold_factor,
            cluster_gap_factor=settings.cluster_gap_factor,
        )
    except NoShockDetectedError as e:
        logger.info(f"No shock measured: {e}")
        return None


def _reference_summary(
    config: ExperimentConfig,
    trajectory: Trajectory,
    q0: InitialCondition,
    model: BaseFlux,
    report: Optional[ShockReport],
    progress: bool,
) -> Dict[str, Any]:
    out = config.output_dir
    grids = cached_fv_run(
        q0,
        model,
        config.ic_description,
        config.reference.cells,
        config.integrator.t_end,
        cfl=config.reference.cfl,
        output_times=trajectory.times.tolist(),
        progress=progress,
    )
    write_reference_dir(grids, os.path.join(out, "reference"))
    rows = error_table(trajectory, grids)
    write_error_csv(rows, os.path.join(out, ERRORS_FILE))

    summary: Dict[str, Any] = {
        "cells": config.reference.cells,
        "cfl": config.reference.cfl,
        "final_l1": rows[-1]["l1"],
        "final_relative_l1": rows[-1]["rel"],
        "max_relative_l1": np.max([row["rel"] for row in rows], axis=0),
    }
    initial_slope = float(np.abs(trajectory.snapshots[0].slopes[:, 0]).max())
    positions = shock_positions(trajectory.final, config.shock.threshold_factor * initial_slope)
    summary["shock_positions"] = positions
    if positions:
        summary["localized_fraction"] = shock_localized_fraction(trajectory.final, grids[-1], positions)
    if report is not None:
        try:
            summary["fv_shock_speed"] = track_fv_shock(grids, (report.times[0], report.times[-1])).speed
        except NoShockDetectedError as e:
            logger.info(f"Reference shock not tracked: {e}")
    return summary


def run_experiment(config: ExperimentConfig, progress: bool = True) -> Dict[str, Any]:
    """
    Run one experiment and write its artifacts.

    Returns:
        Dict[str, Any]: The summary also written to ``summary.yaml``

    Raises:
        SpikeError: Solver failures; when the error carries a last state it is
            written to ``failure_state.yaml`` first
    """
    if config.kind == "zigzag":
        return run_zigzag_sweep(config, progress=progress)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    model = config.build_model()
    q0 = config.build_initial_condition()
    state0 = initialize(q0, n=config.n)
    integrator = replace(
        config.integrator, rate_dump_dir=os.path.join(out, "rates") if config.diagnostics_dump else None
    )
    logger.info(f"Running {config.name}: {model!r}, N={config.n}, {config.reg}")

    try:
        trajectory = run(state0, model, config.reg, integrator, progress=progress)
    except SpikeError as e:
        last_state = getattr(e, "last_state", None)
        if last_state is not None:
            dump_failure_state(last_state, out)
        raise

    write_trajectory(trajectory, os.path.join(out, "trajectory"), config.snapshot_format)
    sample_spline_csv(trajectory.final, os.path.join(out, "final_profile.csv"))

    final = trajectory.diagnostics[-1]
    summary: Dict[str, Any] = {
        "experiment": config.name,
        "kind": config.kind,
        "model": model.params(),
        "initial_condition": config.ic_description,
        "n": config.n,
        "lambda_a": config.reg.lambda_a,
        "lambda_x": config.reg.lambda_x,
        "t_end": config.integrator.t_end,
        "steps": final.steps,
        "rejected": final.rejected,
        "redistributions": final.redistributions,
        "max_mean_drift": trajectory.mean_drift(),
        "n_eff_history": trajectory.n_eff_history,
    }

    report = detect_shock(trajectory, config.shock)
    if report is not None:
        summary["shock"] = {
            "speed": report.speed,
            "position": report.positions[-1],
            "left_state": report.left_state,
            "right_state": report.right_state,
            "rankine_hugoniot_residual": rankine_hugoniot_residual(model, report),
        }
    if config.reference.enabled:
        summary["reference"] = _reference_summary(config, trajectory, q0, model, report, progress)

    path = write_summary(summary, out)
    logger.info(f"Summary written to {path}")
    return summary


def run_zigzag_sweep(
    config: ExperimentConfig, lambdas: Optional[Sequence[float]] = None, progress: bool = True
) -> Dict[str, Any]:
    """
    Reduced zigzag runs for every lambda plus the unregularised reference flow.

    Returns:
        Dict[str, Any]: Summary with the sup deviations ordered by decreasing lambda
    """
    settings = config.zigzag
    lambdas = sorted((float(lam) for lam in (lambdas or settings.lambdas)), reverse=True)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    rows = lambda_sweep(
        lambdas, settings.H0, settings.delta0, settings.t_end, settings.n_out, tol=settings.rel_tol, progress=progress
    )
    write_sweep_csv(rows, os.path.join(out, "zigzag_sweep.csv"))
    unregularised = integrate_reduced(
        settings.H0, settings.delta0, RegularizationParams(0.0, 0.0), settings.t_end, settings.rel_tol, settings.n_out
    )
    unregularised.to_csv(os.path.join(out, "zigzag_unregularised.csv"))

    deviations = [row.sup_deviation for row in rows]
    summary = {
        "experiment": config.name,
        "kind": "zigzag",
        "H0": settings.H0,
        "delta0": settings.delta0,
        "t_end": settings.t_end,
        "lambdas": lambdas,
        "sup_deviation": deviations,
        "strictly_decreasing": all(later < earlier for earlier, later in zip(deviations, deviations[1:])),
        "blowup_time": unregularised.blowup_time,
    }
    path = write_summary(summary, out)
    logger.info(f"Summary written to {path}")
    return summary


def compare(traj_dir: str, ref_dir: str, out_path: Optional[str] = None) -> List[Dict[str, Any]]:
    """
    L1 error table of a written trajectory against a written reference.

    Raises:
        FileNotFoundError: If either directory lacks its index
        TimeMismatchError: If the snapshot times do not match the reference times
    """
    rows = error_table(read_trajectory(traj_dir), read_reference_dir(ref_dir))
    path = out_path or os.path.join(traj_dir, ERRORS_FILE)
    write_error_csv(rows, path)
    logger.info(f"Error table written to {path}")
    return rows


def fv_reference(config: ExperimentConfig, progress: bool = True) -> List[FvGrid]:
    """Reference grids at the experiment's snapshot times, written to ``<output_dir>/reference``."""
    times = snapshot_times(0.0, config.integrator.t_end, config.integrator.snapshot_interval)
    grids = cached_fv_run(
        config.build_initial_condition(),
        config.build_model(),
        config.ic_description,
        config.reference.cells,
        config.integrator.t_end,
        cfl=config.reference.cfl,
        output_times=times.tolist(),
        progress=progress,
    )
    out = os.path.join(config.output_dir, "reference")
    write_reference_dir(grids, out)
    logger.info(f"Reference written to {out}")
    return grids


SWEEP_HEADER = ["lambda", "n", "status", "max_mean_drift", "shock_speed", "final_relative_l1"]


def sweep(
    config: ExperimentConfig,
    lambdas: Sequence[float],
    ns: Optional[Sequence[int]] = None,
    max_workers: Optional[int] = None,
    progress: bool = True,
) -> List[Dict[str, Any]]:
    """
    Independent runs over a (lambda x N) grid, each in ``<output_dir>/lambda_<l>_n_<n>``.

    lambda_a and lambda_x are both set to lambda. Zigzag experiments sweep the
    reduced dynamics instead and ignore ``ns``.

    Raises:
        RuntimeError: After writing ``sweep.csv``, if any run failed
    """
    if config.kind == "zigzag":
        return [run_zigzag_sweep(config, lambdas, progress=progress)]

    ns = list(ns or [config.n])
    tasks = [(float(lam), int(n)) for lam in lambdas for n in ns]

    def task(lam: float, n: int) -> Dict[str, Any]:
        sub = replace(
            config,
            n=n,
            reg=RegularizationParams(lam, lam, config.reg.lambda_b),
            output_dir=os.path.join(config.output_dir, f"lambda_{lam:g}_n_{n}"),
        )
        row: Dict[str, Any] = {"lambda": lam, "n": n}
        try:
            summary = run_experiment(sub, progress=False)
        except SpikeError as e:
            logger.error(f"Sweep run lambda={lam:g}, n={n} failed: {e}")
            return {**row, "status": f"failed: {e}"}
        relative = summary.get("reference", {}).get("final_relative_l1")
        return {
            **row,
            "status": "ok",
            "max_mean_drift": summary["max_mean_drift"],
            "shock_speed": summary.get("shock", {}).get("speed"),
            "final_relative_l1": float(np.max(relative)) if relative is not None else None,
        }

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(task, lam, n): (lam, n) for lam, n in tasks}
        results = {}
        for future in tqdm(as_completed(futures), total=len(futures), desc="Sweep", disable=not progress):
            results[futures[future]] = future.result()
    rows = [results[key] for key in tasks]

    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "sweep.csv"), "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: row.get(key) for key in SWEEP_HEADER})

    failed = [row for row in rows if row["status"] != "ok"]
    if failed:
        runs = ", ".join(f"lambda={row['lambda']:g}/n={row['n']}" for row in failed)
        raise RuntimeError(f"Sweep failed for {len(failed)} runs: {runs}")
    return rows
