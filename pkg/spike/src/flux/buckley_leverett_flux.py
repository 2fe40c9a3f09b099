import numpy as np

from src.flux.base_flux import BaseFlux


def buckley_leverett_flux(u):
    """f(u) = u^2 / (u^2 + (1 - u)^2); the denominator never drops below 1/2."""
    u = np.asarray(u, dtype=float)
    return (u * u / (u * u + (1.0 - u) ** 2))[()]


def buckley_leverett_speed(u):
    """f'(u) = 2u(1 - u) / (u^2 + (1 - u)^2)^2."""
    u = np.asarray(u, dtype=float)
    denominator = u * u + (1.0 - u) ** 2
    return (2.0 * u * (1.0 - u) / denominator ** 2)[()]


class BuckleyLeverettFlux(BaseFlux):
    """Two-phase flow in porous media with equal viscosities, d = 1."""

    name = "buckley_leverett"
    dim = 1

    def flux(self, q: np.ndarray) -> np.ndarray:
        return buckley_leverett_flux(q)

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(buckley_leverett_speed(q))[..., None]

    def wave_speed(self, q: np.ndarray) -> np.ndarray:
        return np.abs(buckley_leverett_speed(np.asarray(q, dtype=float)[..., 0]))
