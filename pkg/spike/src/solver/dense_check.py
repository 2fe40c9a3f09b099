"""
Dense O(N^2) evaluation of the first-order optimality conditions.

Independent of the block system: Gram data come from the autocorrelation g,
the flux moments from per-interval Gauss-Legendre quadrature of the spline
obtained by direct kernel sums.
"""
from dataclasses import dataclass

import numpy as np

from src.flux import BaseFlux
from src.kernel import g, g_prime, g_second, phi_prime_right
from src.solver.fast_solver import RateVector, RegularizationParams
from src.state import KnotState, kernel_nodal_values
from src.utils.quadrature import composite_points

# Gauss-Legendre nodes per knot interval.
DENSE_QUADRATURE_ORDER = 8


@dataclass(frozen=True, eq=False)
class DenseResidual:
    """
    Attributes:
        amp_residual: Amplitude-row residuals after eliminating the multiplier, (N, d)
        pos_residual: Position-row residuals, (N,)
        multiplier: Least-squares value of the constraint multiplier, (d,)
        scale: Magnitude of the largest term entering the conditions
        constraint: max |sum_i adot_i|
    """

    amp_residual: np.ndarray
    pos_residual: np.ndarray
    multiplier: np.ndarray
    scale: float
    constraint: float

    @property
    def max_abs(self) -> float:
        return float(max(np.abs(self.amp_residual).max(), np.abs(self.pos_residual).max()))

    @property
    def relative(self) -> float:
        return self.max_abs / self.scale if self.scale > 0.0 else self.max_abs


def flux_moments(state: KnotState, model: BaseFlux) -> tuple[np.ndarray, np.ndarray]:
    """
    b_i = int phi(x - x_i) d/dx f(q) dx and c_i = int phi'(x - x_i) d/dx f(q) dx.

    b_i is integrated by parts to -int phi'(x - x_i) f(q) dx and c_i reduces to
    f(q(x_i)) - mean(f), so only flux values are needed.
    """
    nodal = kernel_nodal_values(state)
    edges = np.append(state.positions, state.positions[0] + 1.0)
    points, weights = composite_points(edges, DENSE_QUADRATURE_ORDER)
    s = (points - edges[:-1, None]) / state.gaps[:, None]
    nodal_next = np.roll(nodal, -1, axis=0)
    q = (1.0 - s)[:, :, None] * nodal[:, None, :] + s[:, :, None] * nodal_next[:, None, :]
    f = model.flux(q.reshape(-1, state.dim))
    w = weights.ravel()
    kernel_slopes = phi_prime_right(points.ravel()[None, :] - state.positions[:, None])
    b = -(kernel_slopes * w[None, :]) @ f
    c = model.flux(nodal) - (w @ f)[None, :]
    return b, c


def verify_dense(state: KnotState, model: BaseFlux, reg: RegularizationParams, rates: RateVector) -> DenseResidual:
    """
    Residual of the optimality conditions for given rates.

    amplitude rows: sum_j (g_ij adot_j - g'_ij a_j xdot_j) + b_i + lambda_a adot_i + alpha = 0
    position rows:  a_i . sum_j (g'_ij adot_j - g''_ij a_j xdot_j) - a_i . c_i + lambda_x xdot_i = 0

    with alpha eliminated by least squares over the amplitude rows.
    """
    offsets = state.positions[:, None] - state.positions[None, :]
    gram = g(offsets)
    gram_1 = g_prime(offsets)
    gram_2 = g_second(offsets)
    b, c = flux_moments(state, model)

    a = state.amplitudes
    adot = rates.amp_rates
    moving = a * rates.pos_rates[:, None]

    amp_terms = [gram @ adot, gram_1 @ moving, b, reg.lambda_a * adot]
    amp_rows = amp_terms[0] - amp_terms[1] + amp_terms[2] + amp_terms[3]
    multiplier = -amp_rows.mean(axis=0)
    amp_residual = amp_rows + multiplier[None, :]

    inner = gram_1 @ adot - gram_2 @ moving - c
    pos_terms = [np.einsum("nk,nk->n", a, gram_1 @ adot), np.einsum("nk,nk->n", a, gram_2 @ moving),
                 np.einsum("nk,nk->n", a, c), reg.lambda_x * rates.pos_rates]
    pos_residual = np.einsum("nk,nk->n", a, inner) + pos_terms[3]

    scale = max(float(np.abs(term).max()) for term in amp_terms + pos_terms)
    return DenseResidual(
        amp_residual=amp_residual,
        pos_residual=pos_residual,
        multiplier=multiplier,
        scale=scale,
        constraint=float(np.abs(adot.sum(axis=0)).max()),
    )
