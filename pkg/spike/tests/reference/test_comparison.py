"""Tests for L1 comparison, reference shock tracking and reference CSV files."""
import numpy as np
import pytest

from src.errors import NoShockDetectedError, TimeMismatchError
from src.kernel import frac
from src.reference import (
    FvGrid,
    cell_averages,
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
from src.state import initialize
from src.zigzag import exact_profile, zigzag_state


def constant_grid(value: float, cells: int = 100, time: float = 0.0) -> FvGrid:
    return FvGrid(averages=np.full((cells, 1), value), time=time)


def sawtooth_grid(jump_at: float, cells: int = 100, time: float = 0.0) -> FvGrid:
    centers = (np.arange(cells) + 0.5) / cells
    return FvGrid(averages=frac(centers - jump_at)[:, None], time=time)


class TestL1Error:
    """Absolute and relative L1 errors against cell averages."""

    def test_identical_constants(self):
        state = initialize(lambda x: np.full_like(x, 2.0), n=10)
        error = l1_error(state, constant_grid(2.0))
        assert error.absolute == pytest.approx([0.0], abs=1e-14)
        assert error.relative == pytest.approx([0.0], abs=1e-14)

    def test_constant_offset(self):
        state = initialize(lambda x: np.full_like(x, 2.5), n=10)
        error = l1_error(state, constant_grid(2.0))
        assert error.absolute == pytest.approx([0.5])
        assert error.relative == pytest.approx([0.25])

    def test_zero_reference_has_zero_relative_error(self):
        state = initialize(lambda x: np.full_like(x, 1.0), n=10)
        error = l1_error(state, constant_grid(0.0))
        assert error.absolute == pytest.approx([1.0])
        assert error.relative == pytest.approx([0.0])

    def test_sampled_smooth_field(self):
        q0 = lambda x: np.sin(2 * np.pi * x)
        grid = FvGrid(averages=cell_averages(q0, 400), time=0.0)
        state = initialize(q0, n=400)
        assert l1_error(state, grid).absolute[0] <= 1e-4

    def test_zigzag_projection(self):
        grid = FvGrid(averages=cell_averages(lambda x: exact_profile(x, 0.0), 4000), time=0.0)
        assert l1_error(zigzag_state(8.0, 0.25), grid).absolute[0] <= 1e-3

    def test_time_mismatch(self):
        state = initialize(lambda x: np.zeros_like(x), n=10)
        with pytest.raises(TimeMismatchError, match="t="):
            l1_error(state, constant_grid(0.0, time=0.1))

    def test_time_tolerance(self):
        state = initialize(lambda x: np.zeros_like(x), n=10, time=0.1)
        assert l1_error(state, constant_grid(0.0, time=0.1 + 1e-12)).absolute[0] == 0.0


class TestGridDifference:
    def test_difference(self):
        assert grid_l1_difference(constant_grid(1.0), constant_grid(3.0)) == pytest.approx([2.0])

    def test_cell_count_mismatch(self):
        with pytest.raises(ValueError, match="cells"):
            grid_l1_difference(constant_grid(1.0, cells=50), constant_grid(1.0))


class TestShockLocalization:
    """Share of the error mass near given shock positions."""

    def test_error_at_shock(self):
        averages = np.zeros((100, 1))
        averages[50] = 1.0
        state = initialize(lambda x: np.zeros_like(x), n=10)
        grid = FvGrid(averages=averages, time=0.0)
        assert shock_localized_fraction(state, grid, [0.5]) == pytest.approx(1.0)

    def test_split_error(self):
        averages = np.zeros((100, 1))
        averages[50] = 1.0
        averages[0] = 1.0
        state = initialize(lambda x: np.zeros_like(x), n=10)
        grid = FvGrid(averages=averages, time=0.0)
        assert shock_localized_fraction(state, grid, [0.5]) == pytest.approx(0.5)
        assert shock_localized_fraction(state, grid, [0.5, 0.999]) == pytest.approx(1.0)

    def test_no_error(self):
        state = initialize(lambda x: np.zeros_like(x), n=10)
        assert shock_localized_fraction(state, constant_grid(0.0), [0.3]) == 1.0

    def test_requires_positions(self):
        state = initialize(lambda x: np.zeros_like(x), n=10)
        with pytest.raises(ValueError, match="shock position"):
            shock_localized_fraction(state, constant_grid(0.0), [])


class TestShockTracking:
    """Steepest-jump fronts on reference grids."""

    def test_locate(self):
        assert locate_fv_shock(sawtooth_grid(0.3)) == pytest.approx(0.3, abs=1e-12)

    def test_moving_front_across_wrap(self):
        grids = [sawtooth_grid(frac(0.9 + 0.2 * t), time=t) for t in np.linspace(0.0, 1.0, 11)]
        track = track_fv_shock(grids, window=(0.0, 1.0))
        assert track.speed == pytest.approx(0.2, abs=0.02)

    def test_window_too_narrow(self):
        grids = [sawtooth_grid(0.3, time=t) for t in (0.0, 0.5)]
        with pytest.raises(NoShockDetectedError, match="got 1"):
            track_fv_shock(grids, window=(0.4, 0.6))


class TestReferenceFiles:
    """CSV export of reference grids."""

    def test_csv_round_trip(self, tmp_path):
        grid = FvGrid(averages=np.random.default_rng(3).normal(size=(16, 3)), time=0.125)
        path = tmp_path / "nested" / "grid.csv"
        write_fv_csv(grid, str(path))
        loaded = read_fv_csv(str(path))
        assert loaded.time == 0.125
        assert np.array_equal(loaded.averages, grid.averages)

    def test_csv_header(self, tmp_path):
        path = tmp_path / "grid.csv"
        write_fv_csv(constant_grid(1.0, cells=16), str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# time=0.0"
        assert lines[1] == "x,q_0"

    def test_directory(self, tmp_path):
        grids = [constant_grid(float(k), cells=16, time=0.1 * k) for k in range(3)]
        write_reference_dir(grids, str(tmp_path))
        loaded = read_reference_dir(str(tmp_path))
        assert [grid.time for grid in loaded] == [grid.time for grid in grids]
        assert loaded[2].averages == pytest.approx(2.0)

    def test_missing_files(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_reference_dir(str(tmp_path))
        with pytest.raises(FileNotFoundError):
            read_fv_csv(str(tmp_path / "absent.csv"))
