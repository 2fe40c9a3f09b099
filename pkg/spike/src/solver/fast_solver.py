"""
Linear-time evaluation of the regularised parameter velocities.

The optimality conditions of the residual minimisation reduce to one
periodic block-tridiagonal system with 2d unknowns per knot. Its right-hand
side only needs local flux differences on every knot interval, and the rates
follow from the solution by a diagonal rescaling.
"""
import csv
import logging
import os
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from src.errors import DegenerateSpacingError
from src.flux import BaseFlux
from src.solver.block_system import BlockSystem, solve_block_system
from src.state import DELTA_MIN, KnotState

logger = logging.getLogger(__name__)

# Relative tolerance of the a posteriori check sum_i adot_i = 0.
RATE_CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class RegularizationParams:
    """
    Tikhonov weights on the amplitude and position velocities.

    lambda_b would penalise the mean velocity; the mean is conserved exactly,
    so it never enters the solver.
    """

    lambda_a: float
    lambda_x: float
    lambda_b: float = 0.0

    def require_positive(self) -> None:
        if not (self.lambda_a > 0.0 and self.lambda_x > 0.0):
            raise ValueError(
                f"The fast solver needs lambda_a > 0 and lambda_x > 0, got {self.lambda_a}, {self.lambda_x}"
            )


@dataclass(frozen=True, eq=False)
class RateVector:
    """
    Attributes:
        amp_rates: Amplitude velocities, shape (N, d)
        pos_rates: Knot velocities, shape (N,)
        solution: Block-system solution Z, shape (N, 2d), when available
    """

    amp_rates: np.ndarray
    pos_rates: np.ndarray
    solution: Optional[np.ndarray] = None

    def to_vector(self) -> np.ndarray:
        """Same layout as ``KnotState.to_vector``."""
        return np.concatenate([self.pos_rates, self.amp_rates.ravel()])


class IntervalFluxes(NamedTuple):
    """Per-interval flux combinations, both of shape (N, d), interval i = (x_i, x_{i+1})."""

    third: np.ndarray
    second: np.ndarray


def compute_fhat(state: KnotState, model: BaseFlux) -> IntervalFluxes:
    """
    Local flux combinations on every knot interval, wraparound interval included.

    second = (f(q_{i+1}) - f(q_i)) / gap
    third  = (6 (f(q_i) + f(q_{i+1})) - 12 int_0^1 f(q_i + s (q_{i+1} - q_i)) ds) / gap^2

    The second form is the integral of 6 s (1 - s) d^2 f / ds^2 integrated by
    parts, so no flux Hessian is needed.

    Raises:
        InadmissibleStateError: If a nodal or quadrature state is inadmissible
    """
    q = state.nodal_values
    q_next = np.roll(q, -1, axis=0)
    f = model.flux(q)
    f_next = np.roll(f, -1, axis=0)
    average = model.segment_integral(q, q_next)
    gaps = state.gaps[:, None]
    second = (f_next - f) / gaps
    third = (6.0 * (f + f_next) - 12.0 * average) / gaps ** 2
    return IntervalFluxes(third=third, second=second)


def _kron_identity(blocks: np.ndarray, dim: int) -> np.ndarray:
    """Expand (N, 2, 2) blocks to (N, 2d, 2d) as K kron I_d."""
    n = blocks.shape[0]
    return np.einsum("nij,kl->nikjl", blocks, np.eye(dim)).reshape(n, 2 * dim, 2 * dim)


def assemble_system(state: KnotState, fhat: IntervalFluxes, reg: RegularizationParams) -> BlockSystem:
    """
    Assemble the periodic block system for the current state.

    Raises:
        ValueError: If a regularisation weight is not positive
        DegenerateSpacingError: If a knot gap is below DELTA_MIN
    """
    reg.require_positive()
    gaps_right = state.gaps
    if gaps_right.min() <= DELTA_MIN:
        raise DegenerateSpacingError(f"Knot gap {gaps_right.min():.3e} is below the admissible minimum")
    gaps_left = np.roll(gaps_right, 1)
    dim = state.dim
    n = state.n

    inv_r, inv_l = 1.0 / gaps_right, 1.0 / gaps_left
    diag = np.empty((n, 2, 2))
    diag[:, 0, 0] = 12.0 * (inv_r ** 3 + inv_l ** 3)
    diag[:, 0, 1] = 6.0 * (inv_r ** 2 - inv_l ** 2)
    diag[:, 1, 0] = diag[:, 0, 1]
    diag[:, 1, 1] = 4.0 * (inv_r + inv_l)

    lower = np.empty((n, 2, 2))
    lower[:, 0, 0] = -12.0 * inv_l ** 3
    lower[:, 0, 1] = -6.0 * inv_l ** 2
    lower[:, 1, 0] = 6.0 * inv_l ** 2
    lower[:, 1, 1] = 2.0 * inv_l

    upper = np.empty((n, 2, 2))
    upper[:, 0, 0] = -12.0 * inv_r ** 3
    upper[:, 0, 1] = 6.0 * inv_r ** 2
    upper[:, 1, 0] = -6.0 * inv_r ** 2
    upper[:, 1, 1] = 2.0 * inv_r

    diag_blocks = _kron_identity(diag, dim)
    diag_blocks[:, :dim, :dim] += np.eye(dim) / reg.lambda_a
    a = state.amplitudes
    diag_blocks[:, dim:, dim:] += a[:, :, None] * a[:, None, :] / reg.lambda_x

    third, second = fhat
    third_left = np.roll(third, 1, axis=0)
    second_left = np.roll(second, 1, axis=0)
    rhs = np.empty((n, 2 * dim))
    rhs[:, :dim] = third - third_left
    rhs[:, dim:] = -(second - 0.5 * third * gaps_right[:, None]) + (second_left + 0.5 * third_left * gaps_left[:, None])

    return BlockSystem(
        diag=diag_blocks,
        lower=_kron_identity(lower, dim),
        upper=_kron_identity(upper, dim),
        rhs=rhs,
    )


def recover_rates(state: KnotState, solution: np.ndarray, reg: RegularizationParams) -> RateVector:
    """adot_i = D_i / lambda_a and xdot_i = (a_i . D'_i) / lambda_x."""
    reg.require_positive()
    dim = state.dim
    amp_rates = solution[:, :dim] / reg.lambda_a
    pos_rates = np.einsum("nk,nk->n", state.amplitudes, solution[:, dim:]) / reg.lambda_x
    return RateVector(amp_rates=amp_rates, pos_rates=pos_rates, solution=solution)


def compute_rates(state: KnotState, model: BaseFlux, reg: RegularizationParams) -> RateVector:
    """
    Parameter velocities of the state: flux differences, block solve, rescaling.

    Args:
        state: Current (possibly shifted stage) state
        model: Flux model
        reg: Regularisation weights, both positive

    Returns:
        RateVector: Amplitude and position velocities

    Raises:
        InadmissibleStateError, DegenerateSpacingError, LinearSolveError
    """
    reg.require_positive()
    system = assemble_system(state, compute_fhat(state, model), reg)
    rates = recover_rates(state, solve_block_system(system), reg)
    drift = np.abs(rates.amp_rates.sum(axis=0)).max()
    scale = np.abs(rates.amp_rates).max()
    if drift > RATE_CONSTRAINT_TOL * max(scale, 1.0):
        logger.warning(f"Amplitude velocities do not sum to zero: |sum| = {drift:.3e}, max = {scale:.3e}")
    return rates


def characteristic_deviation(
    state: KnotState, model: BaseFlux, rates: RateVector, mask: Optional[np.ndarray] = None
) -> float:
    """
    max_i |xdot_i - f'(q(x_i))| for scalar laws, optionally over masked knots only.

    Raises:
        ValueError: For systems (d > 1), where knots follow no single characteristic
    """
    if state.dim != 1:
        raise ValueError("Characteristic deviation is defined for scalar conservation laws only")
    speeds = model.jacobian(state.nodal_values)[:, 0, 0]
    deviation = np.abs(rates.pos_rates - speeds)
    if mask is not None:
        deviation = deviation[mask]
    return float(deviation.max()) if deviation.size else 0.0


def write_rate_diagnostics(path: str, state: KnotState, rates: RateVector) -> None:
    """Per-knot CSV of positions, amplitudes, velocities and block-system solution."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    dim = state.dim
    solution = rates.solution if rates.solution is not None else np.full((state.n, 2 * dim), np.nan)
    header = (
        ["i", "x"]
        + [f"a_{k}" for k in range(dim)]
        + ["xdot"]
        + [f"adot_{k}" for k in range(dim)]
        + [f"D_{k}" for k in range(dim)]
        + [f"Dprime_{k}" for k in range(dim)]
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for i in range(state.n):
            writer.writerow(
                [i, repr(float(state.positions[i]))]
                + [repr(float(v)) for v in state.amplitudes[i]]
                + [repr(float(rates.pos_rates[i]))]
                + [repr(float(v)) for v in rates.amp_rates[i]]
                + [repr(float(v)) for v in solution[i]]
            )
