#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Random Ensembles - seeded matrices, nodes and kernels for experiment trials

Every trial draws from its own counter-based stream: a numpy Philox
generator keyed by ``seed XOR trial``. Philox (4x64, 10 rounds) is a fixed,
documented algorithm, so a given (seed, trial) pair always yields the same
matrices, independent of how many trials ran before it or on which thread.
"""

import logging
from typing import List, Sequence

import numpy as np

from linalg_engine.src.spectral_linalg import (
    ComplexMatrix,
    EigenDecomposition,
    HermitianMatrix,
    eigh,
    schatten_norm,
)

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1
DEFAULT_SPECTRAL_NORM = 2.0


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial, keyed by ``seed XOR trial`` (both 64-bit unsigned)."""
    key = (int(seed) ^ int(trial)) & SEED_MASK
    return np.random.Generator(np.random.Philox(key=key))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_hermitian(rng: np.random.Generator, dim: int,
                     spectral_norm: float = DEFAULT_SPECTRAL_NORM) -> HermitianMatrix:
    """
    GUE-style Hermitian matrix (G + G*)/2 rescaled so that ||H||_2 equals ``spectral_norm``.

    Args:
        rng: Trial generator
        dim: Matrix dimension
        spectral_norm: Target operator norm (largest |eigenvalue|)

    Returns:
        HermitianMatrix: the sample
    """
    g = _complex_gaussian(rng, (dim, dim))
    h = HermitianMatrix(g)
    values = eigh(h).eigenvalues
    largest = float(np.max(np.abs(values)))
    if largest == 0.0:
        return h
    return HermitianMatrix(h.array * (spectral_norm / largest))


def random_perturbation(rng: np.random.Generator, dim: int, norm: float = 0.5, p: float = 2.0) -> HermitianMatrix:
    """Hermitian direction K rescaled to ``||K||_p == norm``."""
    h = HermitianMatrix(_complex_gaussian(rng, (dim, dim)))
    current = schatten_norm(h, p)
    if current == 0.0:
        return h
    return HermitianMatrix(h.array * (norm / current))


def random_matrix(rng: np.random.Generator, dim: int, norm: float = 1.0) -> ComplexMatrix:
    """General complex operand with Frobenius norm ``norm``."""
    g = _complex_gaussian(rng, (dim, dim))
    return ComplexMatrix(g * (norm / np.linalg.norm(g)))


def random_operands(rng: np.random.Generator, dim: int, count: int, hermitian: bool = False) -> List[ComplexMatrix]:
    if hermitian:
        return [random_perturbation(rng, dim) for _ in range(count)]
    return [random_matrix(rng, dim) for _ in range(count)]


def random_nodes(rng: np.random.Generator, count: int, lo: float = -2.0, hi: float = 2.0,
                 min_gap: float = 0.0) -> np.ndarray:
    """
    ``count`` nodes in [lo, hi] whose sorted gaps are all at least ``min_gap``,
    returned in random order.
    """
    slack = (hi - lo) - min_gap * (count - 1)
    if slack < 0.0:
        raise ValueError(f"Cannot place {count} nodes with gap {min_gap} in [{lo}, {hi}]")
    offsets = np.sort(rng.uniform(0.0, slack, size=count))
    nodes = lo + offsets + min_gap * np.arange(count)
    return nodes[rng.permutation(count)]


def random_grid_values(rng: np.random.Generator, dims: Sequence[int], complex_values: bool = False) -> np.ndarray:
    """Dense kernel values, uniform in [-1, 1] (real and imaginary parts when complex)."""
    shape = tuple(dims)
    values = rng.uniform(-1.0, 1.0, size=shape)
    if complex_values:
        values = values + 1j * rng.uniform(-1.0, 1.0, size=shape)
    return values


def random_polynomial_in(rng: np.random.Generator, a: HermitianMatrix, degree: int = 3) -> ComplexMatrix:
    """
    Z = sum_k c_k A^k with real c_k uniform in [-1, 1]; Z commutes with A
    up to rounding.
    """
    coefficients = rng.uniform(-1.0, 1.0, size=degree + 1)
    power = np.eye(a.dim, dtype=np.complex128)
    z = np.zeros_like(power)
    for c in coefficients:
        z = z + c * power
        power = power @ a.array
    return ComplexMatrix(z)


def random_diagonal_decomposition(rng: np.random.Generator, dim: int) -> EigenDecomposition:
    """Spectral data of a random real diagonal matrix (U = I)."""
    values = np.sort(rng.uniform(-2.0, 2.0, size=dim))
    return EigenDecomposition(values, ComplexMatrix.identity(dim))
