#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Unit Tests for the Multiple Operator Integral Contraction

The contraction is compared with the elementary-tensor product chain, the
brute-force projector sum and the Fréchet derivative of scipy's expm.
"""

import os
import sys
import unittest

import numpy as np
import scipy.linalg

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from calculus_errors import DimMismatchError, EvalError, OrderExceededError
from funcmodel_engine.src.function_models import Cos, Exp, InvQuad, Sin, SqrtEps
from linalg_engine.src.spectral_linalg import ComplexMatrix, eigh, mat_func
from moi_engine.src.moi_contraction import (
    DividedDifferenceKernel,
    GridKernel,
    IdentityResidual,
    MOIRequest,
    TensorProductKernel,
    materialize_kernel,
    moi_apply,
    moi_apply_bruteforce,
)
from random_ensembles import random_grid_values, random_hermitian, random_matrix, random_operands, trial_generator

FACTORS = (Exp(0.5), Sin(1.0), Cos(1.0), InvQuad(), SqrtEps(1.0))


def random_spectra(rng, dim, count):
    return [eigh(random_hermitian(rng, dim)) for _ in range(count)]


class TestMOIApply(unittest.TestCase):
    """moi_apply against independent evaluations"""

    def setUp(self):
        self.rng = trial_generator(404, 0)

    def test_order_zero_is_spectral_calculus(self):
        spectrum = random_spectra(self.rng, 5, 1)
        kernel = GridKernel(np.exp(spectrum[0].eigenvalues))
        result = moi_apply(MOIRequest(kernel, spectrum, []))
        expected = mat_func(Exp(1.0), spectrum[0])
        self.assertLessEqual(IdentityResidual(result, expected).rel_err, 1e-13)

    def test_elementary_tensor_fidelity(self):
        for dim in (2, 4, 8):
            for n in (1, 2, 3):
                spectra = random_spectra(self.rng, dim, n + 1)
                operands = random_operands(self.rng, dim, n)
                models = [FACTORS[k % len(FACTORS)] for k in range(n + 1)]
                kernel = TensorProductKernel.from_functions(models, spectra)
                chain = mat_func(models[0], spectra[0])
                for x, model, spectrum in zip(operands, models[1:], spectra[1:]):
                    chain = chain @ x @ mat_func(model, spectrum)
                residual = IdentityResidual(moi_apply(MOIRequest(kernel, spectra, operands)), chain)
                self.assertLessEqual(residual.relative, 1e-10, f"d={dim} n={n}")

    def test_first_order_exp_matches_frechet_derivative(self):
        a = random_hermitian(self.rng, 6)
        k = random_matrix(self.rng, 6)
        spectrum = eigh(a)
        result = moi_apply(MOIRequest(DividedDifferenceKernel(Exp(1.0), 1), [spectrum, spectrum], [k]))
        # exp([[A, K], [0, A]]) carries the Fréchet derivative in its upper right block
        block = np.block([[a.array, k.array], [np.zeros((6, 6)), a.array]])
        expected = scipy.linalg.expm(block)[:6, 6:]
        self.assertLessEqual(IdentityResidual(result, expected).relative, 1e-10)

    def test_matches_bruteforce_sum(self):
        for n in (1, 2, 3):
            spectra = random_spectra(self.rng, 3, n + 1)
            operands = random_operands(self.rng, 3, n)
            for kernel in (DividedDifferenceKernel(InvQuad(), n),
                           GridKernel(random_grid_values(self.rng, [3] * (n + 1), complex_values=True))):
                request = MOIRequest(kernel, spectra, operands)
                residual = IdentityResidual(moi_apply(request), moi_apply_bruteforce(request))
                self.assertLessEqual(residual.rel_err, 1e-12, f"{kernel!r}")

    def test_grid_copy_of_kernel_is_bitwise_equal(self):
        spectra = random_spectra(self.rng, 4, 3)
        operands = random_operands(self.rng, 4, 2)
        kernel = DividedDifferenceKernel(Sin(1.0), 2)
        direct = moi_apply(MOIRequest(kernel, spectra, operands))
        as_grid = moi_apply(MOIRequest(GridKernel(materialize_kernel(kernel, spectra)), spectra, operands))
        repeated = moi_apply(MOIRequest(kernel, spectra, operands))
        self.assertTrue(np.array_equal(direct.array, as_grid.array))
        self.assertTrue(np.array_equal(direct.array, repeated.array))

    def test_diagonal_data_gives_schur_product(self):
        values = np.array([-1.0, 0.5, 2.0])
        spectrum = eigh(np.diag(values))
        grid = random_grid_values(self.rng, [3, 3])
        x = random_matrix(self.rng, 3)
        result = moi_apply(MOIRequest(GridKernel(grid), [spectrum, spectrum], [x]))
        np.testing.assert_allclose(result.array, grid * x.array, atol=1e-15)

    def test_identical_spectra_coincident_eigenvalues(self):
        spectrum = eigh(np.diag([1.0, 1.0, 2.0]))
        x = ComplexMatrix(np.ones((3, 3)))
        result = moi_apply(MOIRequest(DividedDifferenceKernel(Exp(1.0), 1), [spectrum, spectrum], [x]))
        # f^[1](1, 1) = e on the repeated eigenvalue block
        self.assertAlmostEqual(result.array[0, 1].real, np.e, places=12)
        self.assertAlmostEqual(result.array[0, 2].real, np.exp(2.0) - np.e, places=12)

    def test_materialized_kernel_matches_entries(self):
        values = np.array([-1.0, -1.0 + 1e-9, 0.5, 2.0])
        clustered = eigh(np.diag(values))
        for n in (1, 2, 3):
            spectra = random_spectra(self.rng, 4, n) + [clustered]
            for f in (Exp(1.0), InvQuad(), Sin(1.0)):
                kernel = DividedDifferenceKernel(f, n)
                grid = kernel.materialize(spectra)
                self.assertEqual(grid.shape, (4,) * (n + 1))
                for index in np.ndindex(*grid.shape):
                    expected = kernel.entry(index, spectra)
                    self.assertLessEqual(abs(grid[index] - expected), 1e-10 * (1.0 + abs(expected)),
                                         f"{f} n={n} {index}")


class TestMOIRequest(unittest.TestCase):
    """Validation of the contraction inputs"""

    def setUp(self):
        rng = trial_generator(505, 0)
        self.spectra = random_spectra(rng, 3, 3)
        self.operands = random_operands(rng, 3, 2)

    def test_wrong_number_of_spectra(self):
        with self.assertRaises(DimMismatchError):
            MOIRequest(DividedDifferenceKernel(Exp(), 2), self.spectra[:2], self.operands)

    def test_wrong_number_of_operands(self):
        with self.assertRaises(DimMismatchError):
            MOIRequest(DividedDifferenceKernel(Exp(), 2), self.spectra, self.operands[:1])

    def test_operand_dimension_mismatch(self):
        with self.assertRaises(DimMismatchError):
            MOIRequest(DividedDifferenceKernel(Exp(), 2), self.spectra, [np.eye(3), np.eye(4)])

    def test_grid_shape_mismatch(self):
        kernel = GridKernel(np.ones((3, 3, 2)))
        with self.assertRaises(DimMismatchError):
            moi_apply(MOIRequest(kernel, self.spectra, self.operands))

    def test_grid_rejects_non_finite(self):
        with self.assertRaises(EvalError):
            GridKernel([[1.0, np.inf], [0.0, 1.0]])

    def test_order_exceeded_propagates(self):
        kernel = DividedDifferenceKernel(Exp(1.0, max_order=1), 2)
        with self.assertRaises(OrderExceededError):
            moi_apply(MOIRequest(kernel, [self.spectra[0]] * 3, self.operands))


class TestIdentityResidual(unittest.TestCase):

    def test_relative_is_zero_for_vanishing_sides(self):
        residual = IdentityResidual(np.zeros((2, 2)), np.zeros((2, 2)))
        self.assertEqual(residual.relative, 0.0)
        self.assertEqual(residual.rel_err, 0.0)

    def test_schatten_residual(self):
        residual = IdentityResidual(np.eye(2), np.zeros((2, 2)), p=1.0)
        self.assertAlmostEqual(residual.abs_err, 2.0, places=14)
        self.assertAlmostEqual(residual.rel_err, 2.0 / 3.0, places=14)
        self.assertAlmostEqual(residual.relative, 1.0, places=14)

    def test_shape_mismatch(self):
        with self.assertRaises(DimMismatchError):
            IdentityResidual(np.eye(2), np.eye(3))


if __name__ == '__main__':
    unittest.main()
