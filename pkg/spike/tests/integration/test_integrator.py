"""Tests for stepping, the adaptive run loop and trajectory storage."""
from unittest.mock import patch

import numpy as np
import pytest

from src.errors import OrderingViolatedError, UnrecoverableStiffnessError
from src.flux import BurgersFlux
from src.integration import (
    DT_MIN,
    IntegratorConfig,
    Trajectory,
    read_trajectory,
    run,
    snapshot_times,
    step,
    write_trajectory,
)
from src.integration.integrator import STALL_ATTEMPTS, STALL_FRACTION
from src.solver import RegularizationParams, characteristic_deviation, compute_rates
from src.state import KnotState, initialize


def sine_state(n: int) -> KnotState:
    return initialize(lambda x: np.sin(2 * np.pi * x) + 0.5, n=n)


def approaching_knot(vector: np.ndarray) -> np.ndarray:
    """Knot 0 runs into knot 1 at unit speed; amplitudes stay frozen."""
    rates = np.zeros_like(vector)
    rates[0] = 1.0
    return rates


@pytest.fixture
def burgers():
    return BurgersFlux()


@pytest.fixture
def reg():
    return RegularizationParams(1e-3, 1e-3)


class TestStep:
    """Single Runge-Kutta steps."""

    def test_constant_state(self, burgers, reg):
        state = KnotState(positions=np.arange(8) / 8, amplitudes=np.zeros(8), mean=[0.7])
        new = step(state, burgers, reg, 0.1)
        assert np.allclose(new.positions, state.positions, atol=1e-10)
        assert np.allclose(new.amplitudes, 0.0, atol=1e-10)
        assert new.time == pytest.approx(0.1)

    def test_first_order_consistency(self, burgers, reg):
        state = sine_state(50)
        dt = 1e-6
        rates = compute_rates(state, burgers, reg).to_vector()
        new = step(state, burgers, reg, dt)
        change = np.abs(new.to_vector() - state.to_vector()).max()
        assert change <= np.abs(rates).max() * dt * (1.0 + 1e-3)
        assert change >= 0.5 * np.abs(rates).max() * dt

    def test_knot_crossing_rejected(self, burgers):
        state = KnotState(positions=[0.25, 0.75], amplitudes=[[-8.0], [8.0]], mean=[0.0])
        with pytest.raises(OrderingViolatedError):
            step(state, burgers, RegularizationParams(1e-8, 1e-8), 0.4)

    def test_non_positive_dt(self, burgers, reg):
        with pytest.raises(ValueError, match="positive"):
            step(sine_state(10), burgers, reg, 0.0)


class TestIntegratorConfig:
    """Validation of integrator settings."""

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="Supported methods"):
            IntegratorConfig(method="leapfrog")

    @pytest.mark.parametrize("threshold", [0.0, 1.0, 1.5])
    def test_threshold_range(self, threshold):
        with pytest.raises(ValueError, match="redistribute_threshold"):
            IntegratorConfig(redistribute_threshold=threshold)

    def test_tolerances(self):
        with pytest.raises(ValueError, match="Tolerances"):
            IntegratorConfig(rel_tol=0.0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1])
    def test_collision_gap_fraction_range(self, fraction):
        with pytest.raises(ValueError, match="collision_gap_fraction"):
            IntegratorConfig(collision_gap_fraction=fraction)

    def test_can_redistribute(self):
        assert not IntegratorConfig().can_redistribute
        assert IntegratorConfig(redistribute=True).can_redistribute
        assert IntegratorConfig(collision_gap_fraction=0.05).can_redistribute


def test_snapshot_times():
    """Targets are evenly spaced and end exactly at t_end."""
    assert np.allclose(snapshot_times(0.0, 1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    times = snapshot_times(0.0, 0.35, 0.1)
    assert np.allclose(times, [0.0, 0.1, 0.2, 0.3, 0.35])
    assert times[-1] == 0.35
    assert np.allclose(snapshot_times(0.5, 0.5, 0.1), [0.5])


class TestRun:
    """Full integration loop."""

    def test_constant_initial_condition(self, burgers, reg):
        state = KnotState(positions=np.arange(10) / 10, amplitudes=np.zeros(10), mean=[0.3])
        config = IntegratorConfig(t_end=0.2, snapshot_interval=0.05, dt_init=0.01)
        trajectory = run(state, burgers, reg, config, progress=False)
        assert len(trajectory) == 5
        for snapshot in trajectory.snapshots:
            assert np.allclose(snapshot.positions, state.positions, atol=1e-9)
            assert np.allclose(snapshot.amplitudes, 0.0, atol=1e-9)
        assert trajectory.diagnostics[-1].rejected == 0

    def test_snapshots_hit_targets(self, burgers, reg):
        config = IntegratorConfig(t_end=0.035, snapshot_interval=0.01, dt_init=1e-3)
        trajectory = run(sine_state(40), burgers, reg, config, progress=False)
        assert np.allclose(trajectory.times, [0.0, 0.01, 0.02, 0.03, 0.035], atol=1e-14)
        assert np.all(np.diff(trajectory.times) > 0.0)
        for snapshot in trajectory.snapshots:
            assert np.all(np.diff(snapshot.positions) > 0.0)
            assert 0.0 <= snapshot.positions[0] and snapshot.positions[-1] < 1.0

    def test_mean_conservation(self, burgers):
        config = IntegratorConfig(t_end=0.03, snapshot_interval=0.01)
        trajectory = run(sine_state(60), burgers, RegularizationParams(1e-7, 1e-7), config, progress=False)
        assert trajectory.mean_drift() <= 1e-9
        assert np.abs(trajectory.final.amplitudes.sum(axis=0)).max() <= 1e-8

    def test_fixed_step_method(self, burgers, reg):
        config = IntegratorConfig(method="rk4_fixed", t_end=0.02, snapshot_interval=0.02, dt_init=2e-3)
        trajectory = run(sine_state(30), burgers, reg, config, progress=False)
        assert trajectory.diagnostics[-1].steps == 10

    def test_redistribution_triggered(self, burgers, reg):
        knots = np.sort(np.concatenate([np.linspace(0.0, 0.5, 20, endpoint=False), [0.6, 0.8]]))
        state = initialize(lambda x: np.sin(2 * np.pi * x), knots=knots)
        config = IntegratorConfig(t_end=0.01, snapshot_interval=0.01, dt_init=1e-3, redistribute=True)
        trajectory = run(state, burgers, reg, config, progress=False)
        assert trajectory.diagnostics[-1].redistributions >= 1
        assert trajectory.final.n == state.n
        assert trajectory.mean_drift() <= 1e-12

    def test_step_underflow(self, burgers, reg):
        def crossing(vector):
            raise OrderingViolatedError("crossed")

        state = sine_state(10)
        config = IntegratorConfig(t_end=0.1, snapshot_interval=0.1, dt_init=1e-3)
        with patch("src.integration.integrator.make_rhs", return_value=crossing):
            with pytest.raises(UnrecoverableStiffnessError) as info:
                run(state, burgers, reg, config, progress=False)
        assert info.value.dt < DT_MIN
        assert np.allclose(info.value.last_state.positions, state.positions)

    def test_collision_triggers_redistribution(self, burgers, reg):
        state = sine_state(20)
        config = IntegratorConfig(t_end=0.06, snapshot_interval=0.06, dt_init=1e-3, collision_gap_fraction=0.1)
        with patch("src.integration.integrator.make_rhs", return_value=approaching_knot):
            trajectory = run(state, burgers, reg, config, progress=False)
        assert trajectory.diagnostics[-1].redistributions == 1
        assert trajectory.times[-1] == pytest.approx(0.06)
        assert np.allclose(trajectory.final.positions[1:], state.positions[1:])
        assert trajectory.mean_drift() <= 1e-12

    def test_collision_trigger_off_by_default(self, burgers, reg):
        config = IntegratorConfig(t_end=0.04, snapshot_interval=0.04, dt_init=1e-3)
        with patch("src.integration.integrator.make_rhs", return_value=approaching_knot):
            trajectory = run(sine_state(20), burgers, reg, config, progress=False)
        assert trajectory.diagnostics[-1].redistributions == 0
        assert trajectory.final.positions[0] == pytest.approx(0.04)

    def test_rate_dumps(self, tmp_path, burgers, reg):
        config = IntegratorConfig(
            t_end=0.01, snapshot_interval=0.01, dt_init=5e-3, method="rk4_fixed", rate_dump_dir=str(tmp_path)
        )
        run(sine_state(12), burgers, reg, config, progress=False)
        assert sorted(p.name for p in tmp_path.iterdir()) == ["rates_000001.csv", "rates_000002.csv"]


def tiny_steps_only(limit: float = 1e-9, unless_uniform: bool = False):
    """Stand-in for one step attempt: anything above ``limit`` crosses knots."""

    def attempt(state, model, reg, dt, tableau):
        uniform = np.allclose(np.diff(state.positions), 1.0 / state.n)
        if dt > limit and not (unless_uniform and uniform):
            raise OrderingViolatedError("crossed")
        candidate = state.with_time(state.time + dt)
        return candidate, candidate.to_vector(), None

    return attempt


class TestStallGuard:
    """Runs whose accepted steps are too small to make progress."""

    def test_stall_raises(self, burgers, reg):
        state = sine_state(10)
        config = IntegratorConfig(method="rk4_fixed", t_end=0.01, snapshot_interval=0.01, dt_init=1e-3)
        with patch("src.integration.integrator._attempt", side_effect=tiny_steps_only()) as attempt:
            with pytest.raises(UnrecoverableStiffnessError, match="stalled") as info:
                run(state, burgers, reg, config, progress=False)
        assert attempt.call_count == STALL_ATTEMPTS
        assert info.value.dt > DT_MIN
        assert 0.0 < info.value.time < STALL_FRACTION * config.snapshot_interval
        assert np.allclose(info.value.last_state.positions, state.positions)

    def test_stall_rescued_by_redistribution(self, burgers, reg):
        knots = (np.arange(20) + 0.3 * np.sin(np.arange(20))) / 20
        state = initialize(lambda x: np.sin(2 * np.pi * x) + 0.5, knots=knots)
        config = IntegratorConfig(
            method="rk4_fixed", t_end=0.01, snapshot_interval=0.01, dt_init=1e-3, collision_gap_fraction=0.01
        )
        with patch("src.integration.integrator._attempt", side_effect=tiny_steps_only(unless_uniform=True)):
            trajectory = run(state, burgers, reg, config, progress=False)
        assert trajectory.diagnostics[-1].redistributions == 1
        assert trajectory.times[-1] == pytest.approx(0.01)
        assert np.allclose(trajectory.final.positions, np.arange(20) / 20)

    def test_stall_after_redistribution_raises(self, burgers, reg):
        config = IntegratorConfig(
            method="rk4_fixed", t_end=0.01, snapshot_interval=0.01, dt_init=1e-3, collision_gap_fraction=0.01
        )
        with patch("src.integration.integrator._attempt", side_effect=tiny_steps_only()) as attempt:
            with pytest.raises(UnrecoverableStiffnessError, match="again after redistribution"):
                run(sine_state(10), burgers, reg, config, progress=False)
        assert attempt.call_count == 2 * STALL_ATTEMPTS


class TestTrajectoryStorage:
    """Index plus snapshot files."""

    @pytest.mark.parametrize("fmt", ["yaml", "csv"])
    def test_round_trip(self, tmp_path, burgers, reg, fmt):
        config = IntegratorConfig(t_end=0.02, snapshot_interval=0.01, dt_init=1e-3)
        trajectory = run(sine_state(16), burgers, reg, config, progress=False)
        write_trajectory(trajectory, str(tmp_path), fmt)
        loaded = read_trajectory(str(tmp_path))
        assert np.allclose(loaded.times, trajectory.times)
        assert np.allclose(loaded.final.amplitudes, trajectory.final.amplitudes)
        assert loaded.diagnostics[-1].steps == trajectory.diagnostics[-1].steps
        assert loaded.n_eff_history == pytest.approx(trajectory.n_eff_history)

    def test_missing_index(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_trajectory(str(tmp_path))

    def test_times_must_increase(self):
        trajectory = Trajectory()
        state = sine_state(5)
        trajectory.append(state, None)
        with pytest.raises(ValueError, match="increase"):
            trajectory.append(state, None)


def tracking_lambda(n: int) -> float:
    """Penalty shrinking like N^-5, so that lambda * N^3 falls by 4 per doubling."""
    return 1e-9 * (100 / n) ** 5


@pytest.mark.slow
class TestAcceptance:
    """Desk-scale Burgers runs."""

    def test_conservation_n200(self, burgers):
        config = IntegratorConfig(t_end=1.0, snapshot_interval=0.1, collision_gap_fraction=0.05)
        trajectory = run(sine_state(200), burgers, RegularizationParams(1e-7, 1e-7), config, progress=False)
        assert trajectory.times[-1] == pytest.approx(1.0)
        assert trajectory.mean_drift() <= 1e-9
        # the knot at the inflection point x = 0 has zero amplitude and does not move
        assert trajectory.diagnostics[-1].redistributions >= 1

    def test_characteristic_tracking(self, burgers):
        config = IntegratorConfig(t_end=0.1, snapshot_interval=0.02, collision_gap_fraction=0.05)
        worst = []
        for n in (100, 200):
            reg = RegularizationParams(tracking_lambda(n), tracking_lambda(n))
            trajectory = run(sine_state(n), burgers, reg, config, progress=False)
            deviations = []
            for snapshot in trajectory.snapshots:
                rates = compute_rates(snapshot, burgers, reg)
                # a knot with a ~ 0 carries no position information; its speed is set by the penalty alone
                curved = np.abs(snapshot.amplitudes[:, 0]) >= 0.25 * np.abs(snapshot.amplitudes).max()
                deviations.append(characteristic_deviation(snapshot, burgers, rates, mask=curved))
            worst.append(max(deviations))
        assert worst[1] <= 0.7 * worst[0]
        assert worst[1] <= 0.05
