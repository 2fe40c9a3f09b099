"""
First-order finite-volume reference solver on the periodic unit interval.

Rusanov (local Lax-Friedrichs) interface fluxes with SSP-RK2 time stepping;
initial cell averages by Gauss-Legendre quadrature per cell.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.errors import WaveSpeedOverflowError
from src.flux import BaseFlux
from src.utils.quadrature import composite_points

logger = logging.getLogger(__name__)

MIN_CELLS = 16
MAX_CFL = 0.5
CELL_QUADRATURE_ORDER = 4
TIME_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class FvGrid:
    """
    Attributes:
        averages: Cell averages, shape (M, d)
        time: Simulation time
    """

    averages: np.ndarray
    time: float

    @property
    def cells(self) -> int:
        return self.averages.shape[0]

    @property
    def dim(self) -> int:
        return self.averages.shape[1]

    @property
    def dx(self) -> float:
        return 1.0 / self.cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.dx

    def total(self) -> np.ndarray:
        """Integral of the cell-average field, shape (d,)."""
        return self.averages.sum(axis=0) * self.dx


def cell_averages(q0: Callable[[np.ndarray], np.ndarray], cells: int) -> np.ndarray:
    """Averages of q0 over M uniform cells, shape (M, d)."""
    edges = np.linspace(0.0, 1.0, cells + 1)
    points, weights = composite_points(edges, CELL_QUADRATURE_ORDER)
    values = np.asarray(q0(points.ravel()), dtype=float).reshape(cells, CELL_QUADRATURE_ORDER, -1)
    return np.einsum("mk,mkd->md", weights, values) * cells


def rusanov_flux(model: BaseFlux, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """F = (f(L) + f(R))/2 - alpha (R - L)/2 with alpha the larger local wave speed."""
    alpha = np.maximum(model.wave_speed(left), model.wave_speed(right))
    return 0.5 * (model.flux(left) + model.flux(right)) - 0.5 * alpha[:, None] * (right - left)


def flux_divergence(model: BaseFlux, q: np.ndarray, dx: float) -> np.ndarray:
    """-(F_{j+1/2} - F_{j-1/2}) / dx with periodic neighbours."""
    interface = rusanov_flux(model, q, np.roll(q, -1, axis=0))
    return -(interface - np.roll(interface, 1, axis=0)) / dx


def max_wave_speed(model: BaseFlux, q: np.ndarray) -> float:
    """
    Raises:
        WaveSpeedOverflowError: If the largest speed is not finite
    """
    speed = float(np.max(model.wave_speed(q)))
    if not np.isfinite(speed):
        raise WaveSpeedOverflowError(f"Maximal wave speed is {speed}")
    return speed


def ssp_rk2_step(model: BaseFlux, q: np.ndarray, dt: float, dx: float) -> np.ndarray:
    stage = q + dt * flux_divergence(model, q, dx)
    model.check_admissible(stage)
    return 0.5 * (q + stage + dt * flux_divergence(model, stage, dx))


def fv_run(
    q0: Callable[[np.ndarray], np.ndarray],
    model: BaseFlux,
    cells: int,
    t_end: float,
    cfl: float = 0.4,
    output_times: Optional[Sequence[float]] = None,
    progress: bool = True,
) -> List[FvGrid]:
    """
    Advance cell averages of q0 to t_end.

    Args:
        q0: Vectorised initial condition
        model: Flux model
        cells: Number of cells M
        t_end: Final time
        cfl: Courant number, dt = cfl dx / max wave speed
        output_times: Times to record (default: only t_end); each is hit exactly
        progress: Show a tqdm bar

    Returns:
        List[FvGrid]: One grid per output time, in increasing time order

    Raises:
        ValueError: If cells < MIN_CELLS, cfl is outside (0, 0.5] or an output time
            lies outside [0, t_end]
        InadmissibleStateError: If a cell leaves the admissible set
        WaveSpeedOverflowError: If the wave speed is not finite
    """
    if cells < MIN_CELLS:
        raise ValueError(f"Reference grid needs at least {MIN_CELLS} cells, got {cells}")
    if not 0.0 < cfl <= MAX_CFL:
        raise ValueError(f"CFL number must lie in (0, {MAX_CFL}], got {cfl}")
    targets = sorted(set(float(t) for t in (output_times if output_times is not None else [t_end])))
    if targets and (targets[0] < 0.0 or targets[-1] > t_end + TIME_EPS):
        raise ValueError(f"Output times must lie in [0, {t_end}]")

    dx = 1.0 / cells
    q = cell_averages(q0, cells)
    model.check_admissible(q)
    t = 0.0
    grids: List[FvGrid] = []
    with tqdm(total=t_end, desc=f"FV reference M={cells}", unit="t", disable=not progress) as bar:
        for target in targets:
            while target - t > TIME_EPS:
                speed = max_wave_speed(model, q)
                dt = cfl * dx / speed if speed > 0.0 else target - t
                dt = min(dt, target - t)
                q = ssp_rk2_step(model, q, dt, dx)
                model.check_admissible(q)
                t += dt
                bar.update(dt)
            t = target
            grids.append(FvGrid(averages=q.copy(), time=target))
    logger.info(f"FV reference finished at t={t:.6g} with M={cells}")
    return grids


def restrict(grid: FvGrid, cells: int) -> FvGrid:
    """
    Average a fine grid onto a coarser one.

    Raises:
        ValueError: If the fine cell count is not a multiple of ``cells``
    """
    if grid.cells % cells:
        raise ValueError(f"Cannot restrict {grid.cells} cells onto {cells}")
    factor = grid.cells // cells
    return FvGrid(averages=grid.averages.reshape(cells, factor, grid.dim).mean(axis=1), time=grid.time)
