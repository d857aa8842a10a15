#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Multiple operator integral engine package initialization
"""

from moi_engine.src.moi_contraction import (
    DividedDifferenceKernel,
    GridKernel,
    IdentityResidual,
    MOIKernel,
    MOIRequest,
    TensorProductKernel,
    materialize_kernel,
    moi_apply,
    moi_apply_bruteforce,
)
from moi_engine.src.moi_identities import (
    moi_adjoint_check,
    moi_commuting_check,
    moi_compose_check,
    moi_insert_check,
    moi_linearity_check,
    moi_split_check,
)

__all__ = [
    'DividedDifferenceKernel',
    'GridKernel',
    'IdentityResidual',
    'MOIKernel',
    'MOIRequest',
    'TensorProductKernel',
    'materialize_kernel',
    'moi_adjoint_check',
    'moi_apply',
    'moi_apply_bruteforce',
    'moi_commuting_check',
    'moi_compose_check',
    'moi_insert_check',
    'moi_linearity_check',
    'moi_split_check',
]
