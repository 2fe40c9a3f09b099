"""
Knot state of the kernel representation and the spline operations on it.

The solution q(x) = sum_i a_i phi(x - x_i) + mean is a periodic linear spline
with breakpoints at the knots; a_i is minus the slope jump at x_i.
"""
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from src.errors import DegenerateSpacingError, OrderingViolatedError
from src.kernel import frac, kernel_sum
from src.utils.quadrature import composite_integral

logger = logging.getLogger(__name__)

# Smallest admissible distance between neighbouring knots; blocks carry 1/gap^3.
DELTA_MIN = 1e-12
# Tolerance of the sum-of-amplitudes constraint.
CONSTRAINT_TOL = 1e-10
# Gauss-Legendre nodes per knot interval for the initial mean.
MEAN_QUADRATURE_ORDER = 4


@dataclass(frozen=True, eq=False)
class KnotState:
    """
    Parameter state theta = {a_i, x_i} plus the conserved mean.

    Attributes:
        positions: Knot positions, shape (N,). Canonical states have them strictly
            increasing in [0, 1); Runge-Kutta stage states may be shifted by the
            integration but always span less than one period.
        amplitudes: Vector amplitudes, shape (N, d)
        mean: Conserved spatial average, shape (d,)
        time: Simulation time of the state
    """

    positions: np.ndarray
    amplitudes: np.ndarray
    mean: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float).reshape(-1)
        amplitudes = np.asarray(self.amplitudes, dtype=float)
        if amplitudes.ndim == 1:
            amplitudes = amplitudes[:, None]
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if amplitudes.shape[0] != positions.shape[0]:
            raise ValueError(
                f"Got {positions.shape[0]} positions but {amplitudes.shape[0]} amplitudes"
            )
        if mean.shape != (amplitudes.shape[1],):
            raise ValueError(f"Mean must have shape ({amplitudes.shape[1]},), got {mean.shape}")
        if positions.shape[0] < 2:
            raise ValueError("A knot state needs at least 2 knots")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[1]

    @cached_property
    def gaps(self) -> np.ndarray:
        """gaps[i] = x_{i+1} - x_i, the last entry being the wraparound gap."""
        return np.diff(self.positions, append=self.positions[0] + 1.0)

    @cached_property
    def slopes(self) -> np.ndarray:
        """Spline slope on each interval (x_i, x_{i+1}), shape (N, d)."""
        cumulative = np.cumsum(self.amplitudes, axis=0)
        offset = self.gaps @ cumulative / self.gaps.sum()
        return offset[None, :] - cumulative

    @cached_property
    def nodal_values(self) -> np.ndarray:
        """q(x_i), shape (N, d), built in O(N) from slopes and the mean."""
        increments = self.slopes * self.gaps[:, None]
        relative = np.vstack([np.zeros((1, self.dim)), np.cumsum(increments[:-1], axis=0)])
        relative_next = np.roll(relative, -1, axis=0)
        segment_means = 0.5 * (relative + relative_next) * self.gaps[:, None]
        base = self.mean - segment_means.sum(axis=0)
        return relative + base[None, :]

    def to_vector(self) -> np.ndarray:
        """Flatten (positions, amplitudes) for Runge-Kutta arithmetic."""
        return np.concatenate([self.positions, self.amplitudes.ravel()])

    def from_vector(self, vector: np.ndarray, time: Optional[float] = None) -> "KnotState":
        """Inverse of ``to_vector`` keeping mean and dimension of this state."""
        n = self.n
        return KnotState(
            positions=vector[:n],
            amplitudes=vector[n:].reshape(n, self.dim),
            mean=self.mean,
            time=self.time if time is None else time,
        )

    def with_time(self, time: float) -> "KnotState":
        return replace(self, time=time)


def _as_columns(values: np.ndarray, count: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values.reshape(count, -1)


def evaluate(state: KnotState, x) -> np.ndarray:
    """
    Evaluate the linear spline at torus points.

    Args:
        state: Knot state (canonical or a shifted stage state)
        x: Evaluation point(s)

    Returns:
        np.ndarray: Values of shape (M, d)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    base = state.positions[0]
    knots = state.positions - base
    offsets = frac(x - base)
    left = np.searchsorted(knots, offsets, side="right") - 1
    left = np.clip(left, 0, state.n - 1)
    right = (left + 1) % state.n
    s = (offsets - knots[left]) / state.gaps[left]
    nodal = state.nodal_values
    return (1.0 - s)[:, None] * nodal[left] + s[:, None] * nodal[right]


def kernel_nodal_values(state: KnotState) -> np.ndarray:
    """q(x_i) by the direct O(N^2) kernel sum, used as an independent check."""
    return kernel_sum(state.positions, state.positions, state.amplitudes) + state.mean[None, :]


def spline_mean(state: KnotState) -> np.ndarray:
    """Exact integral of the linear spline over the torus."""
    nodal = state.nodal_values
    return (0.5 * (nodal + np.roll(nodal, -1, axis=0)) * state.gaps[:, None]).sum(axis=0)


def amplitudes_from_nodal(positions: np.ndarray, nodal: np.ndarray) -> np.ndarray:
    """
    Closed-form amplitudes of the linear spline through the given nodal values.

    a_i = -((q_{i+1} - q_i)/gap_{i+} - (q_i - q_{i-1})/gap_{i-})
    """
    gaps = np.diff(positions, append=positions[0] + 1.0)
    slopes = (np.roll(nodal, -1, axis=0) - nodal) / gaps[:, None]
    return -(slopes - np.roll(slopes, 1, axis=0))


def uniform_knots(n: int) -> np.ndarray:
    return np.arange(n, dtype=float) / n


def initialize(
    q0: Callable[[np.ndarray], np.ndarray],
    n: Optional[int] = None,
    knots: Optional[np.ndarray] = None,
    time: float = 0.0,
) -> KnotState:
    """
    Fit the kernel representation to an initial condition in closed form.

    Args:
        q0: Vectorised initial condition, returns shape (M,) or (M, d)
        n: Number of uniform knots x_i = i/n (ignored when knots are given)
        knots: Optional explicit knot positions
        time: Time stamp of the returned state

    Returns:
        KnotState: Amplitudes from second differences of q0 at the knots and the
            mean of q0 from composite Gauss-Legendre quadrature

    Raises:
        ValueError: If fewer than 3 uniform knots (or 2 explicit knots) are requested
        DegenerateSpacingError: If explicit knots coincide
    """
    if knots is None:
        if n is None or n < 3:
            raise ValueError(f"Initialization needs at least 3 knots, got {n}")
        positions = uniform_knots(n)
    else:
        positions = np.sort(frac(np.asarray(knots, dtype=float)))
        if positions.shape[0] < 2:
            raise ValueError("Initialization needs at least 2 explicit knots")
        _check_gaps(np.diff(positions, append=positions[0] + 1.0))

    nodal = _as_columns(q0(positions), positions.shape[0])
    amplitudes = amplitudes_from_nodal(positions, nodal)
    edges = np.append(positions, positions[0] + 1.0)
    mean = np.atleast_1d(
        composite_integral(lambda x: _as_columns(q0(x), x.shape[0]), edges, MEAN_QUADRATURE_ORDER)
    )
    drift = np.abs(amplitudes.sum(axis=0)).max()
    if drift > CONSTRAINT_TOL * max(1.0, np.abs(amplitudes).max()):
        raise ArithmeticError(f"Amplitudes do not sum to zero after initialization ({drift:.3e})")
    return KnotState(positions=positions, amplitudes=amplitudes, mean=mean, time=time)


def n_effective(state: KnotState) -> float:
    """Effective knot count 1 / sum(gap^2); equals N for uniform spacing."""
    return 1.0 / float(np.sum(state.gaps ** 2))


def min_gap(state: KnotState) -> float:
    return float(state.gaps.min())


def max_slope(state: KnotState) -> float:
    """Largest absolute spline slope over all intervals and components."""
    return float(np.abs(state.slopes).max())


def total_variation(state: KnotState) -> np.ndarray:
    nodal = state.nodal_values
    return np.abs(np.roll(nodal, -1, axis=0) - nodal).sum(axis=0)


def redistribute(state: KnotState, n: Optional[int] = None) -> KnotState:
    """
    Move the knots to a uniform grid and refit the amplitudes to the current spline.

    The conserved mean is copied, not recomputed.
    """
    n = state.n if n is None else n
    if n < 3:
        raise ValueError(f"Redistribution needs at least 3 knots, got {n}")
    positions = uniform_knots(n)
    nodal = evaluate(state, positions)
    amplitudes = amplitudes_from_nodal(positions, nodal)
    logger.info(f"Redistributed {state.n} knots onto {n} uniform knots at t={state.time:.6g}")
    return KnotState(positions=positions, amplitudes=amplitudes, mean=state.mean.copy(), time=state.time)


def _check_gaps(gaps: np.ndarray) -> None:
    smallest = float(gaps.min())
    if smallest < DELTA_MIN:
        raise DegenerateSpacingError(f"Knot gap {smallest:.3e} is below the admissible minimum {DELTA_MIN:.1e}")


def check_ordering(state: KnotState) -> None:
    """
    Validate a possibly shifted state without reducing it modulo 1.

    Raises:
        OrderingViolatedError: If knots are not strictly increasing within one period
        DegenerateSpacingError: If a gap is positive but below DELTA_MIN
    """
    gaps = state.gaps
    if np.any(gaps <= 0.0) or not np.all(np.isfinite(gaps)):
        crossed = np.flatnonzero(~(gaps > 0.0))
        raise OrderingViolatedError(f"Knots crossed at intervals {crossed[:5].tolist()}")
    _check_gaps(gaps)


def sort_canonicalize(state: KnotState) -> KnotState:
    """
    Reduce positions modulo 1 and sort them, permuting amplitudes consistently.

    Raises:
        DegenerateSpacingError: If two knots coincide after reduction or a gap is
            below DELTA_MIN
    """
    reduced = frac(state.positions)
    order = np.argsort(reduced, kind="stable")
    positions = reduced[order]
    _check_gaps(np.diff(positions, append=positions[0] + 1.0))
    return replace(state, positions=positions, amplitudes=state.amplitudes[order])
