from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from src.utils.quadrature import gauss_legendre_unit

# Nodes of the segment rule, exact to polynomial degree 7.
SEGMENT_QUADRATURE_ORDER = 4
# Relative step of the central finite-difference Jacobian.
FD_RELATIVE_STEP = 1e-6


class BaseFlux(ABC):
    """
    Abstract base class for conservation-law fluxes f: R^d -> R^d.

    States are arrays whose last axis has length ``dim``; every method is
    vectorised over the leading axes. Implementations provide ``flux`` and may
    override the Jacobian, wave speed and admissibility check.
    """

    name: str = "base"
    dim: int = 1

    @abstractmethod
    def flux(self, q: np.ndarray) -> np.ndarray:
        """
        Evaluate the flux.

        Args:
            q: States of shape (..., dim)

        Returns:
            np.ndarray: Fluxes of shape (..., dim)

        Raises:
            InadmissibleStateError: If a state lies outside the admissible set
        """
        pass

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        """Central finite-difference Jacobian of shape (..., dim, dim)."""
        q = np.asarray(q, dtype=float)
        jac = np.empty(q.shape + (self.dim,))
        for j in range(self.dim):
            step = FD_RELATIVE_STEP * np.maximum(1.0, np.abs(q[..., j]))
            shift = np.zeros_like(q)
            shift[..., j] = step
            jac[..., :, j] = (self.flux(q + shift) - self.flux(q - shift)) / (2.0 * step[..., None])
        return jac

    def wave_speed(self, q: np.ndarray) -> np.ndarray:
        """Largest absolute characteristic speed per state, shape (...)."""
        eigenvalues = np.linalg.eigvals(self.jacobian(q))
        return np.abs(eigenvalues).max(axis=-1)

    def check_admissible(self, q: np.ndarray) -> None:
        """Raise InadmissibleStateError for states outside the admissible set."""
        return None

    def segment_integral(self, q_left: np.ndarray, q_right: np.ndarray) -> np.ndarray:
        """
        Average of the flux along straight segments, int_0^1 f(qL + s (qR - qL)) ds.

        Args:
            q_left: Segment start states, shape (..., dim)
            q_right: Segment end states, shape (..., dim)

        Returns:
            np.ndarray: Segment averages of shape (..., dim)
        """
        nodes, weights = gauss_legendre_unit(SEGMENT_QUADRATURE_ORDER)
        q_left = np.asarray(q_left, dtype=float)
        q_right = np.asarray(q_right, dtype=float)
        shape = (-1,) + (1,) * q_left.ndim
        points = q_left[None] + nodes.reshape(shape) * (q_right - q_left)[None]
        return np.tensordot(weights, self.flux(points), axes=(0, 0))

    def params(self) -> Dict[str, Any]:
        """Parameters identifying this model (used for cache keys and summaries)."""
        return {"name": self.name}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"
