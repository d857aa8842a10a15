#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Linear algebra engine package initialization
"""

from linalg_engine.src.spectral_linalg import (
    ComplexMatrix,
    EigenDecomposition,
    HermitianMatrix,
    SchattenIndex,
    eigh,
    mat_func,
    schatten_norm,
    singular_values,
)

__all__ = [
    'ComplexMatrix',
    'EigenDecomposition',
    'HermitianMatrix',
    'SchattenIndex',
    'eigh',
    'mat_func',
    'schatten_norm',
    'singular_values',
]
