"""Flux interface and concrete conservation laws."""

import logging
from typing import Any, Dict

from .base_flux import BaseFlux, SEGMENT_QUADRATURE_ORDER
from .burgers_flux import BurgersFlux, burgers_flux
from .buckley_leverett_flux import BuckleyLeverettFlux, buckley_leverett_flux, buckley_leverett_speed
from .euler_flux import EulerFlux, EulerParams, euler_conserved, euler_flux, euler_primitive

SUPPORTED_MODELS = ["burgers", "buckley_leverett", "euler"]


def _pick_flux(config: Dict[str, Any]) -> BaseFlux:
    """
    Create the flux model named in the configuration.

    Args:
        config: Configuration with a ``model`` section holding ``name`` and,
            for Euler, ``gamma``

    Returns:
        BaseFlux: An instance of the requested model

    Raises:
        ValueError: If the model name is not supported
    """
    model_config = config.get("model", {}) or {}
    name = str(model_config.get("name", "burgers")).lower()

    if name == "burgers":
        return BurgersFlux()
    elif name == "buckley_leverett":
        return BuckleyLeverettFlux()
    elif name == "euler":
        return EulerFlux(EulerParams(gamma=float(model_config.get("gamma", 1.4))))
    else:
        raise ValueError(f"Unsupported model '{name}'. Supported models: {SUPPORTED_MODELS}")


def create_flux(config: Dict[str, Any]) -> BaseFlux:
    """
    Factory function to create the flux model from configuration.

    Raises:
        ValueError: If the model section is invalid
    """
    try:
        return _pick_flux(config)
    except ValueError as e:
        logging.getLogger(__name__).error(f"Model configuration error: {e}")
        raise


__all__ = [
    "BaseFlux",
    "BurgersFlux",
    "BuckleyLeverettFlux",
    "EulerFlux",
    "EulerParams",
    "SEGMENT_QUADRATURE_ORDER",
    "SUPPORTED_MODELS",
    "buckley_leverett_flux",
    "buckley_leverett_speed",
    "burgers_flux",
    "create_flux",
    "euler_conserved",
    "euler_flux",
    "euler_primitive",
]
