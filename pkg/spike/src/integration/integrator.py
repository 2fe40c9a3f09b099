"""
Time integration of the knot parameters.

The state vector is (positions, amplitudes); every right-hand-side evaluation
builds a stage state, validates its ordering and calls the fast solver. Steps
whose stages cross knots, leave the admissible set or degenerate are
rejected and retried with half the step.
"""
import logging
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from tqdm import tqdm

from src.errors import (
    DegenerateSpacingError,
    InadmissibleStateError,
    LinearSolveError,
    OrderingViolatedError,
    UnrecoverableStiffnessError,
)
from src.flux import BaseFlux
from src.integration.runge_kutta import Tableau, error_norm, get_tableau, next_step_size, rk_step
from src.integration.trajectory import SnapshotDiagnostics, Trajectory
from src.solver import RegularizationParams, compute_rates, write_rate_diagnostics
from src.state import (
    KnotState,
    check_ordering,
    min_gap,
    n_effective,
    redistribute,
    sort_canonicalize,
    spline_mean,
)

logger = logging.getLogger(__name__)

DT_MIN = 1e-14
# Snapshot targets closer than this are considered reached.
TIME_EPS = 1e-12
# A run is stalled once this many consecutive attempts advance time by less
# than STALL_FRACTION * snapshot_interval.
STALL_ATTEMPTS = 1000
STALL_FRACTION = 1e-4

REJECTABLE_ERRORS = (OrderingViolatedError, InadmissibleStateError, DegenerateSpacingError, LinearSolveError)


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Attributes:
        method: rk45_adaptive (Dormand-Prince 5(4)) or rk4_fixed
        dt_init: First trial step, the constant step for rk4_fixed
        dt_max: Upper bound on any step
        rel_tol, abs_tol: Error tolerances of the adaptive method
        t_end: Final time
        snapshot_interval: Spacing of recorded snapshots
        redistribute: Whether to redistribute when knots cluster
        redistribute_threshold: Redistribute once N_eff < threshold * N
        collision_gap_fraction: Redistribute once the smallest gap drops below
            fraction / N, None to disable
        seed: Reserved for randomised tie-breaking; unused by the integrator
        rate_dump_dir: Directory for per-step rate CSV dumps, None to disable
    """

    method: str = "rk45_adaptive"
    dt_init: float = 1e-4
    dt_max: float = 1e-2
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    t_end: float = 1.0
    snapshot_interval: float = 0.1
    redistribute: bool = False
    redistribute_threshold: float = 0.6
    collision_gap_fraction: Optional[float] = None
    seed: Optional[int] = None
    rate_dump_dir: Optional[str] = None

    def __post_init__(self):
        get_tableau(self.method)
        if not (self.dt_init > 0.0 and self.dt_max > 0.0 and self.snapshot_interval > 0.0):
            raise ValueError("dt_init, dt_max and snapshot_interval must be positive")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError(f"Tolerances must be positive, got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
        if not 0.0 < self.redistribute_threshold < 1.0:
            raise ValueError(f"redistribute_threshold must lie in (0, 1), got {self.redistribute_threshold}")
        if self.collision_gap_fraction is not None and not 0.0 < self.collision_gap_fraction < 1.0:
            raise ValueError(f"collision_gap_fraction must lie in (0, 1), got {self.collision_gap_fraction}")

    @property
    def can_redistribute(self) -> bool:
        return self.redistribute or self.collision_gap_fraction is not None


def make_rhs(state: KnotState, model: BaseFlux, reg: RegularizationParams) -> Callable[[np.ndarray], np.ndarray]:
    """Right-hand side over flat vectors in the layout of ``state.to_vector``."""

    def rhs(vector: np.ndarray) -> np.ndarray:
        stage = state.from_vector(vector)
        check_ordering(stage)
        return compute_rates(stage, model, reg).to_vector()

    return rhs


def _attempt(
    state: KnotState, model: BaseFlux, reg: RegularizationParams, dt: float, tableau: Tableau
) -> tuple[KnotState, np.ndarray, Optional[np.ndarray]]:
    y = state.to_vector()
    y_new, error = rk_step(make_rhs(state, model, reg), y, dt, tableau)
    candidate = state.from_vector(y_new, time=state.time + dt)
    check_ordering(candidate)
    return candidate, y_new, error


def step(
    state: KnotState, model: BaseFlux, reg: RegularizationParams, dt: float, method: str = "rk4_fixed"
) -> KnotState:
    """
    One Runge-Kutta step followed by canonicalisation.

    Raises:
        ValueError: If dt is not positive
        OrderingViolatedError: If knots crossed within the step
        InadmissibleStateError: If a stage state is inadmissible
        DegenerateSpacingError: If a gap collapsed below DELTA_MIN
    """
    if dt <= 0.0:
        raise ValueError(f"Step size must be positive, got {dt}")
    candidate, _, _ = _attempt(state, model, reg, dt, get_tableau(method))
    return sort_canonicalize(candidate)


def _diagnose(
    state: KnotState, model: BaseFlux, reg: RegularizationParams, steps: int, rejected: int, redistributions: int
) -> SnapshotDiagnostics:
    rates = compute_rates(state, model, reg)
    return SnapshotDiagnostics(
        time=state.time,
        n_eff=n_effective(state),
        spline_mean=spline_mean(state),
        max_pos_rate=float(np.abs(rates.pos_rates).max()),
        min_gap=min_gap(state),
        steps=steps,
        rejected=rejected,
        redistributions=redistributions,
    )


def _redistribution_reason(state: KnotState, config: IntegratorConfig) -> Optional[str]:
    if config.collision_gap_fraction is not None and min_gap(state) < config.collision_gap_fraction / state.n:
        return f"knot collision (min gap {min_gap(state):.3e})"
    if config.redistribute and n_effective(state) < config.redistribute_threshold * state.n:
        return f"clustering (N_eff {n_effective(state):.1f})"
    return None


def snapshot_times(t_start: float, t_end: float, interval: float) -> np.ndarray:
    """Snapshot targets t_start + k * interval, always ending exactly at t_end."""
    if t_end - t_start <= TIME_EPS:
        return np.array([t_start])
    count = int(np.floor((t_end - t_start) / interval + TIME_EPS))
    times = t_start + interval * np.arange(count + 1)
    times = times[times < t_end - TIME_EPS]
    return np.append(times, t_end)


def run(
    state0: KnotState,
    model: BaseFlux,
    reg: RegularizationParams,
    config: IntegratorConfig,
    progress: bool = True,
) -> Trajectory:
    """
    Integrate from state0.time to config.t_end, recording snapshots.

    Args:
        state0: Initial state
        model: Flux model
        reg: Regularisation weights
        config: Integrator settings
        progress: Show a tqdm bar over simulated time

    Returns:
        Trajectory: Snapshots at every snapshot_interval and at t_end

    Raises:
        UnrecoverableStiffnessError: If the step size drops below DT_MIN, or if
            STALL_ATTEMPTS consecutive attempts make no real progress and a
            redistribution does not help; carries the last accepted state
    """
    tableau = get_tableau(config.method)
    state = sort_canonicalize(state0)
    check_ordering(state)
    reg.require_positive()
    if config.t_end < state.time:
        raise ValueError(f"t_end={config.t_end} lies before the initial time {state.time}")

    steps = rejected = redistributions = 0
    trajectory = Trajectory()
    trajectory.append(state, _diagnose(state, model, reg, steps, rejected, redistributions))
    dt = min(config.dt_init, config.dt_max)
    stall_span = STALL_FRACTION * config.snapshot_interval
    stall_origin, attempts = state.time, 0
    rescued_at: Optional[float] = None

    targets = snapshot_times(state.time, config.t_end, config.snapshot_interval)
    with tqdm(total=config.t_end - state.time, desc="Integrating", unit="t", disable=not progress) as bar:
        for target in targets[1:]:
            while target - state.time > TIME_EPS:
                if attempts >= STALL_ATTEMPTS:
                    message = (
                        f"Integration stalled at t={state.time:.9g}: {attempts} attempts advanced time "
                        f"by {state.time - stall_origin:.3e}"
                    )
                    if not config.can_redistribute:
                        raise UnrecoverableStiffnessError(message, state, state.time, dt)
                    if rescued_at is not None and state.time - rescued_at < stall_span:
                        raise UnrecoverableStiffnessError(
                            f"{message}, again after redistribution", state, state.time, dt
                        )
                    logger.warning(f"{message}; redistributing")
                    state = redistribute(state)
                    redistributions += 1
                    rescued_at = state.time
                    dt = min(config.dt_init, config.dt_max)
                    stall_origin, attempts = state.time, 0

                attempts += 1
                h = min(dt, config.dt_max, target - state.time)
                truncated = h < dt
                try:
                    candidate, y_new, error = _attempt(state, model, reg, h, tableau)
                    norm = (
                        error_norm(error, state.to_vector(), y_new, config.rel_tol, config.abs_tol)
                        if tableau.adaptive
                        else 0.0
                    )
                except REJECTABLE_ERRORS as e:
                    rejected += 1
                    dt = 0.5 * h
                    logger.info(f"Rejected step dt={h:.3e} at t={state.time:.6g}: {e}")
                    if dt < DT_MIN:
                        raise UnrecoverableStiffnessError(
                            f"Step size underflow after rejected step: {e}", state, state.time, dt
                        ) from e
                    continue

                if not np.isfinite(norm) or norm > 1.0:
                    rejected += 1
                    dt = 0.5 * h if not np.isfinite(norm) else next_step_size(h, norm, tableau.order)
                    if dt < DT_MIN:
                        raise UnrecoverableStiffnessError(
                            f"Step size underflow (error norm {norm:.3e})",
                            state,
                            state.time,
                            dt,
                        )
                    continue

                previous_time = state.time
                state = sort_canonicalize(candidate)
                steps += 1
                if tableau.adaptive:
                    proposal = next_step_size(h, norm, tableau.order)
                    dt = max(dt, proposal) if truncated else proposal
                else:
                    dt = min(2.0 * dt, config.dt_init) if not truncated else dt

                if state.time - stall_origin >= stall_span:
                    stall_origin, attempts = state.time, 0

                reason = _redistribution_reason(state, config)
                if reason is not None:
                    state = redistribute(state)
                    redistributions += 1
                    tqdm.write(f"Redistributed knots at t={state.time:.6g}: {reason}")

                if config.rate_dump_dir:
                    rates = compute_rates(state, model, reg)
                    write_rate_diagnostics(
                        os.path.join(config.rate_dump_dir, f"rates_{steps:06d}.csv"), state, rates
                    )
                bar.update(state.time - previous_time)

            state = state.with_time(float(target))
            trajectory.append(state, _diagnose(state, model, reg, steps, rejected, redistributions))

    logger.info(f"Integration finished: {steps} accepted, {rejected} rejected, {redistributions} redistributions")
    return trajectory
