#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Perturbation engine package initialization
"""

from perturb_engine.src.perturbation import (
    DerivativeReport,
    PerturbationPath,
    boundedness_ratio,
    commutator_perturbation_residual,
    continuity_sweep,
    default_fd_step,
    derivative_fd,
    derivative_moi,
    first_order_difference_residual,
    moi_path_derivative_residual,
    perturbation_formula_residual,
    phi,
    spectral_hull,
    taylor_remainder,
    telescoping_residual,
)

__all__ = [
    'DerivativeReport',
    'PerturbationPath',
    'boundedness_ratio',
    'commutator_perturbation_residual',
    'continuity_sweep',
    'default_fd_step',
    'derivative_fd',
    'derivative_moi',
    'first_order_difference_residual',
    'moi_path_derivative_residual',
    'perturbation_formula_residual',
    'phi',
    'spectral_hull',
    'taylor_remainder',
    'telescoping_residual',
]
