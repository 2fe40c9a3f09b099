import numpy as np

from src.flux.base_flux import BaseFlux


def burgers_flux(u):
    """f(u) = u^2 / 2."""
    u = np.asarray(u, dtype=float)
    return (0.5 * u * u)[()]


class BurgersFlux(BaseFlux):
    """Inviscid Burgers equation, d = 1."""

    name = "burgers"
    dim = 1

    def flux(self, q: np.ndarray) -> np.ndarray:
        return burgers_flux(q)

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(q, dtype=float)[..., None]

    def wave_speed(self, q: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(q, dtype=float)[..., 0])
