"""
Periodic block-tridiagonal systems in the stacked unknowns Z_i = [D_i; D'_i].

Block row i reads  lower[i] Z_{i-1} + diag[i] Z_i + upper[i] Z_{i+1} = rhs[i]
with indices taken modulo N, so lower[0] and upper[N-1] are the corner blocks.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.errors import LinearSolveError

logger = logging.getLogger(__name__)

# Systems with at most this many block rows are solved densely.
DENSE_FALLBACK_MAX_N = 8
# Condition estimate of the corner system above which the dense path takes over.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """
    Attributes:
        diag: Diagonal blocks, shape (N, 2d, 2d)
        lower: Blocks coupling row i to i-1, shape (N, 2d, 2d); lower[0] couples to N-1
        upper: Blocks coupling row i to i+1, shape (N, 2d, 2d); upper[N-1] couples to 0
        rhs: Right-hand sides, shape (N, 2d)
    """

    diag: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def block_size(self) -> int:
        return self.diag.shape[1]


def expand_dense(system: BlockSystem) -> np.ndarray:
    """
    Dense (N*2d) x (N*2d) matrix of the periodic system.

    Blocks landing on the same position are summed, which covers N = 2 where
    both neighbours of a row are the same knot.
    """
    n, k = system.n, system.block_size
    matrix = np.zeros((n * k, n * k))
    for i in range(n):
        rows = slice(i * k, (i + 1) * k)
        for j, block in ((i, system.diag[i]), ((i - 1) % n, system.lower[i]), ((i + 1) % n, system.upper[i])):
            matrix[rows, j * k:(j + 1) * k] += block
    return matrix


def _solve_dense(system: BlockSystem) -> np.ndarray:
    matrix = expand_dense(system)
    try:
        solution = scipy.linalg.solve(matrix, system.rhs.ravel())
    except (np.linalg.LinAlgError, ValueError) as e:
        raise LinearSolveError(f"Dense solve failed: {e}", np.linalg.cond(matrix)) from e
    if not np.all(np.isfinite(solution)):
        raise LinearSolveError("Dense solve produced non-finite values", np.linalg.cond(matrix))
    return solution.reshape(system.n, system.block_size)


def _to_banded(diag: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, int]:
    """LAPACK band storage of a non-periodic block-tridiagonal matrix."""
    n, k = diag.shape[0], diag.shape[1]
    bandwidth = 2 * k - 1
    band = np.zeros((2 * bandwidth + 1, n * k))
    local_rows, local_cols = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    for offset, blocks, first in ((0, diag, 0), (-1, lower[1:], 1), (1, upper[:-1], 0)):
        index = np.arange(first, first + blocks.shape[0])[:, None, None]
        rows = index * k + local_rows
        cols = (index + offset) * k + local_cols
        band[bandwidth + rows - cols, cols] = blocks
    return band, bandwidth


def _equilibrated_condition(matrix: np.ndarray) -> float:
    scale = 1.0 / np.sqrt(np.maximum(np.abs(np.diag(matrix)), np.finfo(float).tiny))
    return float(np.linalg.cond(matrix * scale[:, None] * scale[None, :]))


def _solve_bordered(system: BlockSystem) -> np.ndarray:
    """
    Banded factorisation of the leading N-1 block rows plus a Schur complement
    for the last knot, which carries both corner couplings.
    """
    n, k = system.n, system.block_size
    m = n - 1
    band, bandwidth = _to_banded(system.diag[:m], system.lower[:m], system.upper[:m])

    border = np.zeros((m, k, k))
    border[0] = system.lower[0]
    border[m - 1] += system.upper[m - 1]
    stacked = np.concatenate([system.rhs[:m].reshape(m * k, 1), border.reshape(m * k, k)], axis=1)
    solved = scipy.linalg.solve_banded((bandwidth, bandwidth), band, stacked, check_finite=False)
    x_rhs = solved[:, 0].reshape(m, k)
    x_border = solved[:, 1:].reshape(m, k, k)

    last_to_first = system.upper[n - 1]
    last_to_prev = system.lower[n - 1]
    schur = system.diag[n - 1] - last_to_first @ x_border[0] - last_to_prev @ x_border[m - 1]
    condition = _equilibrated_condition(schur)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise LinearSolveError("Corner system is ill-conditioned", condition)
    reduced_rhs = system.rhs[n - 1] - last_to_first @ x_rhs[0] - last_to_prev @ x_rhs[m - 1]
    z_last = np.linalg.solve(schur, reduced_rhs)
    z_lead = x_rhs - x_border @ z_last
    return np.vstack([z_lead, z_last[None, :]])


def solve_block_system(system: BlockSystem) -> np.ndarray:
    """
    Solve the periodic block-tridiagonal system in O(N).

    Args:
        system: Assembled block system

    Returns:
        np.ndarray: Solution vectors Z_i, shape (N, 2d)

    Raises:
        LinearSolveError: If neither the banded nor the dense path succeeds
    """
    if system.n <= DENSE_FALLBACK_MAX_N:
        return _solve_dense(system)
    try:
        solution = _solve_bordered(system)
    except (LinearSolveError, np.linalg.LinAlgError) as e:
        logger.info(f"Banded periodic solve fell back to the dense path: {e}")
        return _solve_dense(system)
    if not np.all(np.isfinite(solution)):
        logger.info("Banded periodic solve produced non-finite values, using the dense path")
        return _solve_dense(system)
    return solution
