#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Function model engine package initialization
"""

from funcmodel_engine.src.function_models import (
    Cos,
    Custom,
    Exp,
    FunctionModel,
    FunctionSpec,
    Interval,
    InvQuad,
    Polynomial,
    Sin,
    SqrtEps,
    eval_deriv,
    parse_function_spec,
    product_model,
    sup_norm_estimate,
)

__all__ = [
    'Cos',
    'Custom',
    'Exp',
    'FunctionModel',
    'FunctionSpec',
    'Interval',
    'InvQuad',
    'Polynomial',
    'Sin',
    'SqrtEps',
    'eval_deriv',
    'parse_function_spec',
    'product_model',
    'sup_norm_estimate',
]
