"""Tests for the linear-time rate solver, checked against the dense optimality conditions."""
import csv
import time

import numpy as np
import pytest

from src.errors import DegenerateSpacingError
from src.flux import BurgersFlux, EulerFlux, euler_conserved
from src.solver import (
    RateVector,
    RegularizationParams,
    assemble_system,
    characteristic_deviation,
    compute_fhat,
    compute_rates,
    expand_dense,
    recover_rates,
    verify_dense,
    write_rate_diagnostics,
)
from src.state import KnotState, amplitudes_from_nodal, initialize
from tests.conftest import random_state


def state_from_nodal(positions, nodal) -> KnotState:
    """State whose spline passes exactly through the given nodal values."""
    positions = np.asarray(positions, dtype=float)
    nodal = np.asarray(nodal, dtype=float).reshape(len(positions), -1)
    gaps = np.diff(positions, append=positions[0] + 1.0)
    mean = (0.5 * (nodal + np.roll(nodal, -1, axis=0)) * gaps[:, None]).sum(axis=0)
    return KnotState(positions=positions, amplitudes=amplitudes_from_nodal(positions, nodal), mean=mean)


def euler_random_state(n: int, seed: int) -> KnotState:
    """Small perturbation of a uniform Euler flow."""
    base = random_state(n, dim=3, seed=seed, scale=0.5, mean=euler_conserved(1.0, 0.3, 1.0))
    return base


def sine_state(n: int) -> KnotState:
    return initialize(lambda x: np.sin(2 * np.pi * x) + 0.5, n=n)


@pytest.fixture
def burgers():
    return BurgersFlux()


class TestComputeFhat:
    """Local flux combinations."""

    def test_constant_state(self, burgers):
        state = KnotState(positions=[0.0, 0.3, 0.7], amplitudes=np.zeros(3), mean=[2.0])
        third, second = compute_fhat(state, burgers)
        assert np.allclose(third, 0.0, atol=1e-10)
        assert np.allclose(second, 0.0)

    def test_burgers_closed_form(self, burgers):
        state = state_from_nodal([0.0, 0.1, 0.55], [0.0, 1.0, 0.5])
        third, second = compute_fhat(state, burgers)
        assert second[0, 0] == pytest.approx(5.0)
        assert third[0, 0] == pytest.approx(100.0)
        q = state.nodal_values[:, 0]
        jumps = (np.roll(q, -1) - q) / state.gaps
        assert np.allclose(third[:, 0], jumps ** 2)


class TestAssembleSystem:
    """Block formulas and right-hand side."""

    def test_uniform_diagonal_blocks(self, burgers):
        state = initialize(lambda x: np.sin(2 * np.pi * x), n=10)
        reg = RegularizationParams(1e-3, 2e-3)
        system = assemble_system(state, compute_fhat(state, burgers), reg)
        delta = 0.1
        for i in range(state.n):
            expected = [[24 / delta ** 3 + 1 / reg.lambda_a, 0.0],
                        [0.0, 8 / delta + state.amplitudes[i, 0] ** 2 / reg.lambda_x]]
            assert np.allclose(system.diag[i], expected, rtol=1e-12)

    def test_constant_state_rhs(self, burgers):
        state = KnotState(positions=np.arange(6) / 6, amplitudes=np.zeros(6), mean=[1.0])
        system = assemble_system(state, compute_fhat(state, burgers), RegularizationParams(1.0, 1.0))
        assert np.allclose(system.rhs, 0.0, atol=1e-9)

    def test_symmetric_positive_definite(self):
        state = random_state(7, dim=3, seed=2, mean=euler_conserved(1.0, 0.0, 1.0))
        system = assemble_system(state, compute_fhat(state, EulerFlux()), RegularizationParams(1e-2, 1e-2))
        matrix = expand_dense(system)
        assert np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-9)
        assert np.linalg.eigvalsh(matrix).min() > 0.0

    def test_non_positive_lambda(self, burgers):
        state = random_state(5)
        with pytest.raises(ValueError, match="lambda_a"):
            assemble_system(state, compute_fhat(state, burgers), RegularizationParams(0.0, 1.0))

    def test_degenerate_spacing(self, burgers):
        state = KnotState(positions=[0.0, 1e-13, 0.5], amplitudes=np.zeros(3), mean=[0.0])
        with pytest.raises(DegenerateSpacingError):
            assemble_system(state, compute_fhat(state, burgers), RegularizationParams(1.0, 1.0))


class TestRecoverRates:
    """Rescaling of the block solution."""

    def test_amplitude_rate(self):
        state = KnotState(positions=[0.0, 0.5], amplitudes=[[1.0], [-1.0]], mean=[0.0])
        solution = np.array([[1e-7, 0.0], [-1e-7, 0.0]])
        rates = recover_rates(state, solution, RegularizationParams(1e-7, 1.0))
        assert rates.amp_rates[:, 0] == pytest.approx([1.0, -1.0])

    def test_position_rate_dot_product(self):
        state = KnotState(positions=[0.0, 0.5], amplitudes=[[1.0, 0.0], [-1.0, 0.0]], mean=[0.0, 0.0])
        solution = np.array([[0.0, 0.0, 3.0, 5.0], [0.0, 0.0, 0.0, 0.0]])
        rates = recover_rates(state, solution, RegularizationParams(1.0, 1.0))
        assert rates.pos_rates[0] == pytest.approx(3.0)

    def test_constant_state(self, burgers):
        state = KnotState(positions=np.arange(12) / 12, amplitudes=np.zeros(12), mean=[0.7])
        rates = compute_rates(state, burgers, RegularizationParams(1e-7, 1e-7))
        assert np.allclose(rates.amp_rates, 0.0, atol=1e-8)
        assert np.allclose(rates.pos_rates, 0.0)


class TestDenseEquivalence:
    """compute_rates satisfies the dense optimality conditions."""

    @pytest.mark.parametrize("seed", range(50))
    def test_random_states(self, seed):
        n = 4 + seed % 9
        lam = 1e-3 if (seed // 2) % 2 else 1e-7
        reg = RegularizationParams(lam, lam)
        if seed % 2:
            state, model = random_state(n, seed=seed), BurgersFlux()
        else:
            state, model = euler_random_state(n, seed), EulerFlux()
        rates = compute_rates(state, model, reg)
        report = verify_dense(state, model, reg, rates)
        assert report.relative <= 1e-8
        assert report.constraint <= 1e-8 * max(np.abs(rates.amp_rates).max(), 1e-300)

    def test_bordered_path_large_state(self, burgers):
        state = random_state(30, seed=4)
        reg = RegularizationParams(1e-4, 1e-4)
        report = verify_dense(state, burgers, reg, compute_rates(state, burgers, reg))
        assert report.relative <= 1e-8

    def test_zero_state(self, burgers):
        state = KnotState(positions=np.arange(5) / 5, amplitudes=np.zeros(5), mean=[0.0])
        rates = RateVector(amp_rates=np.zeros((5, 1)), pos_rates=np.zeros(5))
        report = verify_dense(state, burgers, RegularizationParams(1.0, 1.0), rates)
        assert report.max_abs == 0.0

    def test_perturbed_rates(self, burgers):
        state = random_state(8, seed=12)
        reg = RegularizationParams(1e-3, 1e-3)
        rates = compute_rates(state, burgers, reg)
        baseline = verify_dense(state, burgers, reg, rates).max_abs
        amp = rates.amp_rates.copy()
        amp[3, 0] += 1e-3
        perturbed = verify_dense(state, burgers, reg, RateVector(amp_rates=amp, pos_rates=rates.pos_rates)).max_abs
        assert perturbed - baseline >= 0.5 * reg.lambda_a * 1e-3


class TestZigzagConfiguration:
    """Two-kernel zigzag: knots approach each other at unit speed as lambda vanishes."""

    def test_knot_speeds(self, burgers):
        state = KnotState(positions=[0.25, 0.75], amplitudes=[[-8.0], [8.0]], mean=[0.0])
        rates = compute_rates(state, burgers, RegularizationParams(1e-8, 1e-8))
        assert rates.pos_rates == pytest.approx([-1.0, 1.0], abs=1e-3)
        assert rates.amp_rates[:, 0] == pytest.approx([0.0, 0.0], abs=1e-3)


class TestCharacteristics:
    """Knots move with the characteristic speed away from inflection points."""

    @staticmethod
    def masked_deviation(n: int, lam: float, burgers) -> float:
        state = sine_state(n)
        rates = compute_rates(state, burgers, RegularizationParams(lam, lam))
        curved = np.abs(state.amplitudes[:, 0]) >= 0.25 * np.abs(state.amplitudes).max()
        return characteristic_deviation(state, burgers, rates, mask=curved)

    def test_deviation_vanishes_with_lambda(self, burgers):
        deviations = [self.masked_deviation(50, lam, burgers) for lam in (1e-6, 1e-8, 1e-10)]
        assert deviations[1] <= 0.5 * deviations[0]
        assert deviations[2] <= 0.5 * deviations[1]
        assert deviations[2] <= 1e-2

    def test_deviation_shrinks_with_n(self, burgers):
        # the penalties act through lambda * N^3, so lambda must fall faster than N^-3
        deviations = [self.masked_deviation(n, 1e-9 * (100 / n) ** 5, burgers) for n in (100, 200)]
        assert deviations[1] <= 0.7 * deviations[0]
        assert deviations[1] <= 0.05

    def test_inflection_knot_is_pinned(self, burgers):
        # a = 0 at x = 0, so the residual does not depend on that knot's velocity
        state = sine_state(100)
        rates = compute_rates(state, burgers, RegularizationParams(1e-7, 1e-7))
        assert abs(state.amplitudes[0, 0]) <= 1e-10
        assert abs(rates.pos_rates[0]) <= 1e-6
        assert characteristic_deviation(state, burgers, rates) == pytest.approx(0.5, abs=1e-3)

    def test_systems_rejected(self):
        state = euler_random_state(6, 0)
        rates = RateVector(amp_rates=np.zeros((6, 3)), pos_rates=np.zeros(6))
        with pytest.raises(ValueError, match="scalar"):
            characteristic_deviation(state, EulerFlux(), rates)


def test_write_rate_diagnostics(tmp_path, burgers):
    """Diagnostic dump has one row per knot with all columns."""
    state = random_state(6, seed=1)
    rates = compute_rates(state, burgers, RegularizationParams(1e-3, 1e-3))
    path = tmp_path / "diag" / "step.csv"
    write_rate_diagnostics(str(path), state, rates)
    with open(path, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["i", "x", "a_0", "xdot", "adot_0", "D_0", "Dprime_0"]
    assert len(rows) == 7
    assert float(rows[1][3]) == pytest.approx(rates.pos_rates[0])


@pytest.mark.slow
def test_linear_complexity(burgers):
    """Quadrupling N costs at most five times as much."""
    reg = RegularizationParams(1e-7, 1e-7)
    timings = []
    for n in (1000, 4000):
        state = initialize(lambda x: np.sin(2 * np.pi * x) + 0.5 * np.cos(6 * np.pi * x), n=n)
        compute_rates(state, burgers, reg)
        start = time.perf_counter()
        for _ in range(5):
            compute_rates(state, burgers, reg)
        timings.append(time.perf_counter() - start)
    assert timings[1] <= 5.0 * timings[0]
