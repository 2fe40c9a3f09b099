"""
Explicit Runge-Kutta stepping over flat parameter vectors.

Tableaux are plain data; ``rk_step`` evaluates the stages of any of them and,
for embedded pairs, also returns the difference between the propagating and
the embedded solution.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# Step-size controller constants.
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass(frozen=True, eq=False)
class Tableau:
    """
    Butcher tableau.

    Attributes:
        name: Method name as used in configs
        a: Stage coefficients, lower triangle row by row
        b: Weights of the propagating solution
        b_low: Weights of the embedded solution, None for fixed-step methods
        order: Order used by the step-size controller (of the lower solution)
    """

    name: str
    a: tuple
    b: np.ndarray
    b_low: Optional[np.ndarray]
    order: int

    @property
    def stages(self) -> int:
        return len(self.b)

    @property
    def adaptive(self) -> bool:
        return self.b_low is not None


DORMAND_PRINCE = Tableau(
    name="rk45_adaptive",
    a=(
        (),
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    ),
    b=np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0]),
    b_low=np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]),
    order=4,
)

CLASSICAL_RK4 = Tableau(
    name="rk4_fixed",
    a=(
        (),
        (1 / 2,),
        (0.0, 1 / 2),
        (0.0, 0.0, 1.0),
    ),
    b=np.array([1 / 6, 1 / 3, 1 / 3, 1 / 6]),
    b_low=None,
    order=4,
)

TABLEAUX = {tableau.name: tableau for tableau in (DORMAND_PRINCE, CLASSICAL_RK4)}


def get_tableau(method: str) -> Tableau:
    """
    Raises:
        ValueError: If the method is unknown
    """
    if method not in TABLEAUX:
        raise ValueError(f"Unsupported integration method '{method}'. Supported methods: {list(TABLEAUX)}")
    return TABLEAUX[method]


def rk_step(
    rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float, tableau: Tableau
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    One step of an autonomous system y' = rhs(y).

    Exceptions raised by ``rhs`` at a stage propagate unchanged so that the
    caller can reject the step.

    Returns:
        (y_new, error): error is y_high - y_low for embedded pairs, None otherwise
    """
    slopes = np.empty((tableau.stages,) + y.shape)
    for i, row in enumerate(tableau.a):
        stage = y.copy()
        for j, coeff in enumerate(row):
            if coeff != 0.0:
                stage += dt * coeff * slopes[j]
        slopes[i] = rhs(stage)
    y_new = y + dt * np.tensordot(tableau.b, slopes, axes=1)
    if not tableau.adaptive:
        return y_new, None
    error = dt * np.tensordot(tableau.b - tableau.b_low, slopes, axes=1)
    return y_new, error


def error_norm(error: np.ndarray, y: np.ndarray, y_new: np.ndarray, rel_tol: float, abs_tol: float) -> float:
    """RMS of the error scaled by abs_tol + rel_tol (1 + max(|y|, |y_new|)) per component."""
    scale = abs_tol + rel_tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
    return float(np.sqrt(np.mean((error / scale) ** 2)))


def next_step_size(dt: float, norm: float, order: int) -> float:
    """Standard controller: dt * safety * norm^(-1/(order+1)), factor clipped."""
    if norm == 0.0:
        return dt * MAX_FACTOR
    factor = SAFETY * norm ** (-1.0 / (order + 1))
    return dt * min(MAX_FACTOR, max(MIN_FACTOR, factor))
