#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Engine Configuration Loader

Each engine keeps its numerical constants in ``<engine>/config/*.yaml``.
This module reads those files and merges them over the in-code defaults,
so an engine still works when its YAML file is missing.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

import yaml

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent


def _merge(defaults: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@lru_cache(maxsize=None)
def _read_yaml(path: str) -> Dict[str, Any]:
    config_file = Path(path)
    if not config_file.exists():
        logger.debug(f"No config file at {config_file}, using built-in defaults")
        return {}
    with open(config_file, 'r') as file:
        config = yaml.safe_load(file) or {}
    if not isinstance(config, dict):
        raise ValueError(f"Config file {config_file} must contain a mapping, got {type(config).__name__}")
    logger.debug(f"Loaded config from {config_file}: {sorted(config)}")
    return config


def load_engine_config(engine: str, name: str, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """
    Load ``<engine>/config/<name>.yaml`` merged over ``defaults``.

    Args:
        engine: Engine directory name, e.g. ``"linalg_engine"``
        name: YAML file stem inside the engine's ``config`` directory
        defaults: Values used for every key the file does not set

    Returns:
        Dict[str, Any]: The merged configuration (a fresh dict)
    """
    path = PROJECT_ROOT / engine / 'config' / f"{name}.yaml"
    return _merge(defaults, _read_yaml(str(path)))


def load_root_config(path: Path, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """Load a root-level YAML file (``experiment_config.yaml``) merged over ``defaults``."""
    return _merge(defaults, _read_yaml(str(path)))
