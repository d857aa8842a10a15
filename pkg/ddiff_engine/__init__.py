#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Divided difference engine package initialization
"""

from ddiff_engine.src.divided_differences import (
    ClusterPartition,
    DividedDifferenceEvaluator,
    NodeList,
    cluster_nodes,
    dd_product_residual,
    dd_recursion_residual,
    dd_simplex_oracle,
    divided_difference,
)

__all__ = [
    'ClusterPartition',
    'DividedDifferenceEvaluator',
    'NodeList',
    'cluster_nodes',
    'dd_product_residual',
    'dd_recursion_residual',
    'dd_simplex_oracle',
    'divided_difference',
]
