"""Named initial conditions used by presets and experiment configs."""
import logging
from typing import Any, Callable, Dict

import numpy as np

from src.flux import EulerParams, euler_conserved
from src.zigzag import exact_profile

logger = logging.getLogger(__name__)

InitialCondition = Callable[[np.ndarray], np.ndarray]


def sine(amplitude: float = 1.0, offset: float = 0.5, frequency: int = 1) -> InitialCondition:
    """amplitude * sin(2 pi k x) + offset."""
    return lambda x: amplitude * np.sin(2.0 * np.pi * frequency * np.asarray(x)) + offset


def bimodal() -> InitialCondition:
    """cos(2 pi x) - cos(4 pi x), which develops two shocks under Burgers."""
    return lambda x: np.cos(2.0 * np.pi * np.asarray(x)) - np.cos(4.0 * np.pi * np.asarray(x))


def sin4() -> InitialCondition:
    """sin^4(pi x), a saturation profile in [0, 1]."""
    return lambda x: np.sin(np.pi * np.asarray(x)) ** 4


def euler_pressure_wave(
    rho: float = 1.0, v: float = 1.0, p: float = 2.0, amplitude: float = 1.0, gamma: float = 1.4
) -> InitialCondition:
    """Uniform density and velocity with pressure p + amplitude * sin(2 pi x)."""
    params = EulerParams(gamma=gamma)

    def q0(x):
        x = np.asarray(x, dtype=float)
        pressure = p + amplitude * np.sin(2.0 * np.pi * x)
        return euler_conserved(np.full_like(x, rho), np.full_like(x, v), pressure, params)

    return q0


def zigzag(H0: float = 1.0, delta0: float = 0.25) -> InitialCondition:
    return lambda x: exact_profile(x, 0.0, H0, delta0)


def constant(value: Any = 0.0) -> InitialCondition:
    """Constant state; ``value`` may be a scalar or a vector."""
    vector = np.atleast_1d(np.asarray(value, dtype=float))
    return lambda x: np.broadcast_to(vector, (np.asarray(x).shape[0], vector.shape[0])).copy()


def box(low: float = 0.0, high: float = 1.0, left: float = 0.25, right: float = 0.5) -> InitialCondition:
    """``high`` on [left, right) and ``low`` elsewhere."""
    if not 0.0 <= left < right <= 1.0:
        raise ValueError(f"Box needs 0 <= left < right <= 1, got left={left}, right={right}")
    return lambda x: np.where((np.asarray(x) >= left) & (np.asarray(x) < right), high, low)


INITIAL_CONDITIONS: Dict[str, Callable[..., InitialCondition]] = {
    "sine": sine,
    "bimodal": bimodal,
    "sin4": sin4,
    "euler_pressure_wave": euler_pressure_wave,
    "zigzag": zigzag,
    "constant": constant,
    "box": box,
}


def describe_initial_condition(config: Dict[str, Any]) -> Dict[str, Any]:
    """Name and parameters of the configured initial condition, as plain data."""
    ic_config = config.get("initial_condition", {}) or {}
    params = dict(ic_config.get("params", {}) or {})
    name = str(ic_config.get("name", "sine")).lower()
    if name == "euler_pressure_wave":
        params.setdefault("gamma", float((config.get("model", {}) or {}).get("gamma", 1.4)))
    return {"name": name, "params": params}


def create_initial_condition(config: Dict[str, Any]) -> InitialCondition:
    """
    Factory function to create the initial condition from configuration.

    Args:
        config: Configuration with an ``initial_condition`` section holding ``name``
            and optional ``params``; Euler profiles take gamma from ``model``

    Returns:
        InitialCondition: Vectorised q0

    Raises:
        ValueError: If the name is unknown or the parameters do not fit
    """
    description = describe_initial_condition(config)
    name = description["name"]
    if name not in INITIAL_CONDITIONS:
        message = f"Unsupported initial condition '{name}'. Supported initial conditions: {sorted(INITIAL_CONDITIONS)}"
        logger.error(message)
        raise ValueError(message)
    try:
        return INITIAL_CONDITIONS[name](**description["params"])
    except TypeError as e:
        raise ValueError(f"Invalid parameters for initial condition '{name}': {e}") from e
