#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Experiment Models

Pydantic schemas for the experiment runner: the resolved ``ExperimentConfig``
and the ``ReportRow`` emitted for every verified identity or estimate.
Configuration is layered: built-in defaults, ``experiment_config.yaml``,
MOI_* environment variables, then a ``--config`` JSON file and CLI flags.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from calculus_errors import ConfigError
from engine_config import PROJECT_ROOT, load_root_config
from funcmodel_engine.src.function_models import FunctionSpec

logger = logging.getLogger(__name__)

MAX_DIM = 64
MAX_ORDER = 4
SEED_MAX = (1 << 64) - 1

TOLERANCE_DEFAULTS = {
    'ddiff_permutation': 1e-9,
    'ddiff_coincident': 1e-10,
    'ddiff_oracle': 1e-6,
    'ddiff_recursion': 1e-10,
    'ddiff_product': 1e-8,
    'ddiff_uniform_bound': 1e-9,
    'ddiff_cluster': 1e-3,
    'moi_tensor': 1e-10,
    'moi_lemma': 1e-10,
    'moi_bruteforce': 1e-12,
    'moi_commuting': 1e-9,
    'moi_linearity': 1e-12,
    'moi_adjoint': 1e-12,
    'moi_contraction': 1e-9,
    'derivative': 1e-5,
    'derivative_fourth_order': 1e-3,
    'derivative_polynomial': 1e-11,
    'perturbation': 1e-9,
    'first_order_difference': 1e-10,
    'commutator_perturbation': 1e-9,
    'telescoping': 1e-9,
    'path_derivative': 1e-5,
    'taylor_identity': 1e-9,
    'taylor_polynomial': 1e-12,
    'taylor_stability': 10.0,
    'continuity': 0.75,
    'ratio_cap': 1e6,
}

ROOT_DEFAULTS = {
    'experiment': {
        'seed': 0,
        'dim': 6,
        'order': 3,
        'trials': 5,
        'p_values': [1.5, 2.0, 3.0, 4.0],
        'function': {'kind': 'exp', 'params': [1.0]},
        'format': 'csv',
        'workers': 1,
    },
    'tolerances': TOLERANCE_DEFAULTS,
}


class ExperimentConfig(BaseModel):
    """Seeded description of one experiment run; every field is validated on construction."""

    model_config = ConfigDict(extra='forbid')

    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    dim: int = Field(default=6, ge=1, le=MAX_DIM)
    order: int = Field(default=3, ge=1, le=MAX_ORDER)
    p_values: List[float] = Field(default_factory=lambda: [1.5, 2.0, 3.0, 4.0], min_length=1)
    function: FunctionSpec = Field(default_factory=lambda: FunctionSpec(kind='exp', params=[1.0]))
    trials: int = Field(default=5, ge=1)
    tolerances: Dict[str, float] = Field(default_factory=lambda: dict(TOLERANCE_DEFAULTS))
    slot: Optional[int] = Field(default=None, ge=1)
    step: Optional[float] = Field(default=None, gt=0.0)
    t_range: Tuple[float, float] = (-1.0, 1.0)
    workers: int = Field(default=1, ge=1)
    format: Literal['csv', 'json'] = 'csv'
    out: Optional[str] = None
    matrix_a: Optional[str] = None
    matrix_k: Optional[str] = None

    @field_validator('p_values')
    @classmethod
    def _p_in_open_range(cls, values: List[float]) -> List[float]:
        for p in values:
            if not (math.isfinite(p) and p > 1.0):
                raise ValueError(f"Schatten exponents must be finite and > 1, got {p}")
        return values

    @field_validator('tolerances')
    @classmethod
    def _positive_tolerances(cls, tolerances: Dict[str, float]) -> Dict[str, float]:
        merged = dict(TOLERANCE_DEFAULTS)
        merged.update(tolerances)
        for name, value in merged.items():
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"tolerance '{name}' must be finite and > 0, got {value}")
        return merged

    @model_validator(mode='after')
    def _check_ranges(self) -> 'ExperimentConfig':
        if not self.t_range[0] < self.t_range[1]:
            raise ValueError(f"t_range must satisfy a < b, got {self.t_range}")
        if self.slot is not None and self.slot > max(self.order, 2):
            raise ValueError(f"slot {self.slot} exceeds the largest order {max(self.order, 2)}")
        return self

    def tolerance(self, name: str) -> float:
        return self.tolerances[name]

    def header(self) -> Dict[str, Any]:
        """The resolved configuration as plain JSON types."""
        return self.model_dump(mode='json')


class ReportRow(BaseModel):
    """
    One verified identity or estimate. ``pass`` holds iff the compared error
    (rel_err, or abs_err for absolute checks) is within ``tolerance``.
    """

    model_config = ConfigDict(populate_by_name=True)

    trial: int
    check: str
    lhs_norm: float
    rhs_norm: float
    abs_err: float
    rel_err: float
    tolerance: float
    passed: bool = Field(alias='pass')
    # the report header carries the seed; rows keep it for logging only
    seed: int = Field(exclude=True)

    @classmethod
    def evaluate(cls, trial: int, check: str, seed: int, lhs_norm: float, rhs_norm: float,
                 abs_err: float, rel_err: float, tolerance: float, absolute: bool = False) -> 'ReportRow':
        """Build a row, deciding ``pass`` from the error and the tolerance."""
        error = abs_err if absolute else rel_err
        passed = bool(math.isfinite(error) and error <= tolerance)
        return cls(trial=trial, check=check, seed=seed, lhs_norm=float(lhs_norm), rhs_norm=float(rhs_norm),
                   abs_err=float(abs_err), rel_err=float(rel_err), tolerance=float(tolerance), passed=passed)

    def as_record(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)


def _first_error_field(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return 'config'
    location = details[0].get('loc') or ('config',)
    return '.'.join(str(part) for part in location)


def _env_overrides(environment: Dict[str, Optional[str]]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if environment.get('workers'):
        overrides['workers'] = environment['workers']
    return overrides


def build_experiment_config(overrides: Optional[Dict[str, Any]] = None, config_file: Optional[str] = None,
                            environment: Optional[Dict[str, Optional[str]]] = None) -> ExperimentConfig:
    """
    Resolve an ExperimentConfig from all configuration layers.

    Args:
        overrides: Values from CLI flags (highest priority; ``None`` values are ignored)
        config_file: Path of a ``--config`` JSON file
        environment: MOI_* settings (see ``env_loader.environment_settings``)

    Returns:
        ExperimentConfig: validated configuration

    Raises:
        ConfigError: naming the offending field
    """
    environment = environment or {}
    root_path = Path(environment.get('config_path') or os.path.join(PROJECT_ROOT, 'experiment_config.yaml'))
    try:
        root = load_root_config(root_path, ROOT_DEFAULTS)
    except (OSError, ValueError) as e:
        raise ConfigError('config_path', f"cannot read {root_path}: {e}")

    values: Dict[str, Any] = dict(root.get('experiment') or {})
    values['tolerances'] = dict(root.get('tolerances') or {})
    values.update(_env_overrides(environment))

    if config_file:
        try:
            with open(config_file, 'r') as file:
                payload = json.load(file)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError('config', f"cannot parse {config_file}: {e}")
        if not isinstance(payload, dict):
            raise ConfigError('config', f"{config_file} must contain a JSON object")
        tolerances = payload.pop('tolerances', None)
        values.update(payload)
        if tolerances is not None:
            if not isinstance(tolerances, dict):
                raise ConfigError('tolerances', 'must be an object of name -> value')
            values['tolerances'].update(tolerances)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == 'tolerances':
            values['tolerances'].update(value)
        else:
            values[key] = value

    unknown = sorted(set(values['tolerances']) - set(TOLERANCE_DEFAULTS))
    if unknown:
        raise ConfigError(f"tolerances.{unknown[0]}", 'unknown tolerance name')

    try:
        config = ExperimentConfig(**values)
    except ValidationError as e:
        field = _first_error_field(e)
        message = e.errors()[0].get('msg', str(e))
        raise ConfigError(field, message)
    logger.debug(f"Resolved experiment config: seed={config.seed}, dim={config.dim}, order={config.order}")
    return config


class ExperimentSuite:
    """
    A family of checks run once per seeded trial.

    Subclasses implement ``run_trial``; ``summarize`` may add rows that
    aggregate over all trials (reported with trial index -1).
    """

    name = 'suite'
    SUMMARY_TRIAL = -1

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def run_trial(self, trial: int) -> List[ReportRow]:
        raise NotImplementedError

    def summarize(self, rows: List[ReportRow]) -> List[ReportRow]:
        return []

    @property
    def primary_p(self) -> float:
        """p = 2 when requested, otherwise the first requested exponent."""
        return 2.0 if 2.0 in self.config.p_values else self.config.p_values[0]

    def row(self, trial: int, check: str, tolerance: str, lhs_norm: float, rhs_norm: float,
            abs_err: float, rel_err: float, absolute: bool = False) -> ReportRow:
        return ReportRow.evaluate(trial, check, self.config.seed, lhs_norm, rhs_norm, abs_err, rel_err,
                                  self.config.tolerance(tolerance), absolute)

    def residual_row(self, trial: int, check: str, tolerance: str, residual, relative: bool = False) -> ReportRow:
        """Row from an ``IdentityResidual``; ``relative`` uses abs/max(|lhs|, |rhs|) instead of abs/scale."""
        rel_err = residual.relative if relative else residual.rel_err
        return self.row(trial, check, tolerance, residual.lhs_norm, residual.rhs_norm, residual.abs_err, rel_err)

    def exact_row(self, trial: int, check: str, lhs, rhs) -> ReportRow:
        """Row that passes only when the two arrays are identical entry by entry; tolerance is reported as 0."""
        lhs, rhs = np.asarray(lhs), np.asarray(rhs)
        same_shape = lhs.shape == rhs.shape
        difference = float(np.max(np.abs(lhs - rhs), initial=0.0)) if same_shape else math.inf
        return ReportRow(trial=trial, check=check, seed=self.config.seed,
                         lhs_norm=float(np.linalg.norm(lhs)), rhs_norm=float(np.linalg.norm(rhs)),
                         abs_err=difference, rel_err=difference, tolerance=0.0,
                         passed=bool(np.array_equal(lhs, rhs)))
