"""One-dimensional compressible Euler equations in conserved variables (rho, rho v, rho E)."""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.errors import InadmissibleStateError
from src.flux.base_flux import BaseFlux


@dataclass(frozen=True)
class EulerParams:
    """Adiabatic index of an ideal gas."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"Adiabatic index must exceed 1, got {self.gamma}")


def euler_primitive(q, params: EulerParams = EulerParams()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Density, velocity and pressure of conserved states.

    Raises:
        InadmissibleStateError: If density or pressure is not positive
    """
    q = np.asarray(q, dtype=float)
    rho = q[..., 0]
    if np.any(~(rho > 0.0)):
        raise InadmissibleStateError(f"Non-positive density {float(np.min(rho)):.6g}")
    v = q[..., 1] / rho
    p = (params.gamma - 1.0) * (q[..., 2] - 0.5 * rho * v * v)
    if np.any(~(p > 0.0)):
        raise InadmissibleStateError(f"Non-positive pressure {float(np.min(p)):.6g}")
    return rho, v, p


def euler_conserved(rho, v, p, params: EulerParams = EulerParams()) -> np.ndarray:
    rho, v, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, v, p)))
    energy = p / (params.gamma - 1.0) + 0.5 * rho * v * v
    return np.stack([rho, rho * v, energy], axis=-1)


def euler_flux(q, params: EulerParams = EulerParams()) -> np.ndarray:
    """Flux (rho v, rho v^2 + p, (rho E + p) v)."""
    q = np.asarray(q, dtype=float)
    rho, v, p = euler_primitive(q, params)
    return np.stack([q[..., 1], q[..., 1] * v + p, (q[..., 2] + p) * v], axis=-1)


class EulerFlux(BaseFlux):
    """Ideal-gas Euler system, d = 3."""

    name = "euler"
    dim = 3

    def __init__(self, params: EulerParams = EulerParams()):
        self.euler_params = params

    @property
    def gamma(self) -> float:
        return self.euler_params.gamma

    def flux(self, q: np.ndarray) -> np.ndarray:
        return euler_flux(q, self.euler_params)

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        rho, v, p = euler_primitive(q, self.euler_params)
        gamma = self.gamma
        enthalpy = (q[..., 2] + p) / rho
        jac = np.zeros(q.shape + (3,))
        jac[..., 0, 1] = 1.0
        jac[..., 1, 0] = 0.5 * (gamma - 3.0) * v * v
        jac[..., 1, 1] = (3.0 - gamma) * v
        jac[..., 1, 2] = gamma - 1.0
        jac[..., 2, 0] = v * (0.5 * (gamma - 1.0) * v * v - enthalpy)
        jac[..., 2, 1] = enthalpy - (gamma - 1.0) * v * v
        jac[..., 2, 2] = gamma * v
        return jac

    def wave_speed(self, q: np.ndarray) -> np.ndarray:
        rho, v, p = euler_primitive(q, self.euler_params)
        return np.abs(v) + np.sqrt(self.gamma * p / rho)

    def check_admissible(self, q: np.ndarray) -> None:
        euler_primitive(q, self.euler_params)

    def params(self) -> Dict[str, Any]:
        return {"name": self.name, "gamma": self.gamma}
