"""Configuration utilities: loading, presets, defaults, validation and CLI overrides."""
import os
from typing import Any, Dict, Mapping

import yaml
from jsonschema import Draft7Validator
from omegaconf import DictConfig, OmegaConf

from src.errors import ConfigError

PRESET_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "presets")

DEFAULTS: Dict[str, Any] = {
    "experiment": {"name": "experiment", "kind": "spike"},
    "model": {"name": "burgers", "gamma": 1.4},
    "initial_condition": {"name": "sine", "params": {}},
    "solver": {"n": 200, "lambda_a": 1e-7, "lambda_x": 1e-7, "lambda_b": 0.0},
    "integrator": {
        "method": "rk45_adaptive",
        "dt_init": 1e-4,
        "dt_max": 1e-2,
        "rel_tol": 1e-6,
        "abs_tol": 1e-9,
        "t_end": 1.0,
        "snapshot_interval": 0.1,
        "redistribute": False,
        "redistribute_threshold": 0.6,
        "collision_gap_fraction": None,
        "seed": None,
    },
    "reference": {"enabled": False, "cells": 4000, "cfl": 0.4},
    "output": {"dir": "runs/experiment", "snapshot_format": "yaml", "diagnostics_dump": False},
    "shock": {"window": None, "threshold_factor": 10.0, "cluster_gap_factor": 0.1},
    "zigzag": {
        "H0": 1.0,
        "delta0": 0.25,
        "lambdas": [1e-2, 1e-3, 1e-4, 1e-5],
        "t_end": 1.0,
        "n_out": 101,
        "rel_tol": 1e-10,
    },
}


def _section(properties: Dict[str, Any], required=()) -> Dict[str, Any]:
    return {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}


_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE = {"type": "number", "minimum": 0}

CONFIG_SCHEMA: Dict[str, Any] = _section(
    {
        "experiment": _section(
            {"name": {"type": "string"}, "kind": {"enum": ["spike", "zigzag"]}}, required=["name", "kind"]
        ),
        "model": _section({"name": {"type": "string"}, "gamma": {"type": "number", "exclusiveMinimum": 1}}),
        "initial_condition": _section({"name": {"type": "string"}, "params": {"type": "object"}}, required=["name"]),
        "solver": _section(
            {
                "n": {"type": "integer", "minimum": 3},
                "lambda_a": _NON_NEGATIVE,
                "lambda_x": _NON_NEGATIVE,
                "lambda_b": _NON_NEGATIVE,
            }
        ),
        "integrator": _section(
            {
                "method": {"enum": ["rk45_adaptive", "rk4_fixed"]},
                "dt_init": _POSITIVE,
                "dt_max": _POSITIVE,
                "rel_tol": _POSITIVE,
                "abs_tol": _POSITIVE,
                "t_end": _NON_NEGATIVE,
                "snapshot_interval": _POSITIVE,
                "redistribute": {"type": "boolean"},
                "redistribute_threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "collision_gap_fraction": {
                    "oneOf": [{"type": "null"}, {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}]
                },
                "seed": {"type": ["integer", "null"]},
            }
        ),
        "reference": _section(
            {
                "enabled": {"type": "boolean"},
                "cells": {"type": "integer", "minimum": 16},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
            }
        ),
        "output": _section(
            {
                "dir": {"type": "string"},
                "snapshot_format": {"enum": ["yaml", "csv"]},
                "diagnostics_dump": {"type": "boolean"},
            }
        ),
        "shock": _section(
            {
                "window": {
                    "oneOf": [{"type": "null"}, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]
                },
                "threshold_factor": _POSITIVE,
                "cluster_gap_factor": _POSITIVE,
            }
        ),
        "zigzag": _section(
            {
                "H0": _POSITIVE,
                "delta0": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.25},
                "lambdas": {"type": "array", "items": _NON_NEGATIVE, "minItems": 1},
                "t_end": _POSITIVE,
                "n_out": {"type": "integer", "minimum": 2},
                "rel_tol": _POSITIVE,
            }
        ),
    },
    required=["experiment"],
)


def read_config(config_path: str) -> DictConfig:
    """
    Load configuration with OmegaConf with resolution.

    Args:
        config_path: Path to the configuration file

    Returns:
        DictConfig: Configuration object with resolved values

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the file is not valid YAML
    """
    config_path = os.path.abspath(config_path)
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Config file not found: {config_path}")
    try:
        cfg = OmegaConf.load(config_path)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {config_path}: {e}") from e

    # Resolve all variables in the config
    cfg = OmegaConf.create(OmegaConf.to_yaml(cfg, resolve=True))
    return cfg


def supported_presets() -> list:
    if not os.path.isdir(PRESET_DIR):
        return []
    return sorted(os.path.splitext(name)[0] for name in os.listdir(PRESET_DIR) if name.endswith(".yaml"))


def load_preset(name: str) -> DictConfig:
    """
    Raises:
        ValueError: If no preset of that name exists
    """
    presets = supported_presets()
    if name not in presets:
        raise ValueError(f"Unknown preset '{name}'. Supported presets: {presets}")
    return read_config(os.path.join(PRESET_DIR, f"{name}.yaml"))


def with_defaults(cfg: DictConfig) -> DictConfig:
    """Fill every section missing from ``cfg`` with DEFAULTS."""
    return OmegaConf.merge(OmegaConf.create(DEFAULTS), cfg)


def apply_overrides(cfg: DictConfig, overrides: Mapping[str, Any]) -> DictConfig:
    """
    Merge dotted-key overrides such as ``{"solver.n": 500}`` into the config.

    Keys whose value is None are skipped, so unset CLI flags leave the file value.
    """
    nested: Dict[str, Any] = {}
    for key, value in overrides.items():
        if value is None:
            continue
        *parents, leaf = key.split(".")
        node = nested
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return OmegaConf.merge(cfg, OmegaConf.create(nested))


def to_plain(cfg: Any) -> Dict[str, Any]:
    if isinstance(cfg, DictConfig):
        return OmegaConf.to_container(cfg, resolve=True)
    return dict(cfg)


def validate_config(cfg: Any) -> Dict[str, Any]:
    """
    Validate a (merged) configuration against CONFIG_SCHEMA.

    Returns:
        Dict[str, Any]: The configuration as plain containers

    Raises:
        ConfigError: Naming the offending key path of the first error
    """
    plain = to_plain(cfg)
    validator = Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(plain), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        error = errors[0]
        path = ".".join(str(part) for part in error.absolute_path) or "<root>"
        raise ConfigError(f"Invalid config at '{path}': {error.message}")
    return plain
