#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Multiple operator integral checks for the experiment runner: elementary
tensors, kernel consistency, the commuting reduction, the composition,
splitting and insertion identities, the brute-force oracle, adjoint
symmetry, linearity and the first-order contraction bound.
"""

import logging
from typing import List

import numpy as np

from experiment_models import ExperimentSuite, ReportRow
from funcmodel_engine.src.function_models import Cos, Exp, FunctionModel, InvQuad, Sin, SqrtEps
from linalg_engine.src.spectral_linalg import ComplexMatrix, eigh, mat_func, schatten_norm
from moi_engine.src.moi_contraction import (
    DividedDifferenceKernel,
    GridKernel,
    IdentityResidual,
    MOIRequest,
    TensorProductKernel,
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
from random_ensembles import (
    random_grid_values,
    random_hermitian,
    random_matrix,
    random_operands,
    random_polynomial_in,
    trial_generator,
)

logger = logging.getLogger(__name__)

TENSOR_FACTORS = (Exp(0.5), Sin(1.0), Cos(1.0), InvQuad(), SqrtEps(1.0))
BRUTEFORCE_DIM = 2


class MOISuite(ExperimentSuite):
    """Contraction engine checks at dimension ``dim`` and order ``order``."""

    name = 'moi'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        d, n = self.config.dim, self.config.order
        f = self.config.function.build()
        rows: List[ReportRow] = []

        # elementary tensors: Γ(f_1 ⊗ ... ⊗ f_{n+1})(X_1..X_n) = f_1(A_1) X_1 f_2(A_2) ... X_n f_{n+1}(A_{n+1})
        spectra = [eigh(random_hermitian(rng, d)) for _ in range(n + 1)]
        operands = random_operands(rng, d, n)
        models = [TENSOR_FACTORS[k % len(TENSOR_FACTORS)] for k in range(n + 1)]
        kernel = TensorProductKernel.from_functions(models, spectra)
        contracted = moi_apply(MOIRequest(kernel, spectra, operands))
        chain = mat_func(models[0], spectra[0])
        for x, model, spectrum in zip(operands, models[1:], spectra[1:]):
            chain = chain @ x @ mat_func(model, spectrum)
        rows.append(self.residual_row(trial, f"moi_tensor_fidelity[n={n}]", 'moi_tensor',
                                      IdentityResidual(contracted, chain)))

        grid = GridKernel(kernel.materialize(spectra))
        as_grid = moi_apply(MOIRequest(grid, spectra, operands))
        rows.append(self.exact_row(trial, f"moi_grid_tensor_bitwise[n={n}]", contracted.array, as_grid.array))

        # commuting reduction for the configured function and the exp / invquad pair, at every order up to n
        a = random_hermitian(rng, d)
        zs = [random_polynomial_in(rng, a) for _ in range(n)]
        for model in _commuting_models(f):
            for order in range(1, n + 1):
                rows.append(self.residual_row(trial, f"moi_commuting[f={model},n={order}]", 'moi_commuting',
                                              moi_commuting_check(model, order, a, zs[:order])))

        rows.extend(self._lemma_rows(trial, rng, d, n + 1))
        # the same identities summed index by index at small dimension
        rows.extend(self._lemma_rows(trial, rng, BRUTEFORCE_DIM, n + 1, bruteforce=True))

        # brute-force index summation at small dimension
        small = [eigh(random_hermitian(rng, BRUTEFORCE_DIM)) for _ in range(n + 1)]
        small_operands = random_operands(rng, BRUTEFORCE_DIM, n)
        request = MOIRequest(DividedDifferenceKernel(f, n), small, small_operands)
        rows.append(self.residual_row(trial, f"moi_bruteforce[n={n},d={BRUTEFORCE_DIM}]", 'moi_bruteforce',
                                      IdentityResidual(moi_apply(request), moi_apply_bruteforce(request))))

        # adjoint symmetry: real kernel, Hermitian operands, identical spectra
        spectrum = eigh(random_hermitian(rng, d))
        hermitian_operands = random_operands(rng, d, n, hermitian=True)
        rows.append(self.residual_row(trial, f"moi_adjoint_symmetry[n={n}]", 'moi_adjoint',
                                      moi_adjoint_check(DividedDifferenceKernel(f, n), [spectrum] * (n + 1),
                                                        hermitian_operands)))

        # linearity in the kernel and in the first operand
        kernel_a = GridKernel(random_grid_values(rng, [d] * (n + 1)))
        kernel_b = GridKernel(random_grid_values(rng, [d] * (n + 1)))
        weight = float(rng.uniform())
        rows.append(self.residual_row(trial, f"moi_linearity_kernel[n={n}]", 'moi_linearity',
                                      moi_linearity_check(kernel_a, kernel_b, weight, spectra, operands)))
        rows.append(self.residual_row(trial, f"moi_linearity_operand[n={n}]", 'moi_linearity',
                                      moi_linearity_check(kernel_a, kernel_b, weight, spectra, operands,
                                                          slot=1, other=random_matrix(rng, d))))

        # Schur multiplier contraction at n = 1 in the Hilbert-Schmidt norm
        pair = spectra[:2]
        multiplier = GridKernel(random_grid_values(rng, [d, d], complex_values=True))
        x = operands[0]
        value = schatten_norm(moi_apply(MOIRequest(multiplier, pair, [x])), 2.0)
        bound = float(np.max(np.abs(multiplier.values))) * schatten_norm(x, 2.0)
        excess = max(0.0, value - bound)
        rows.append(self.row(trial, "moi_contraction_bound[n=1,p=2]", 'moi_contraction',
                             value, bound, excess, excess / (1.0 + bound), absolute=True))

        logger.debug(f"moi trial {trial}: {len(rows)} rows")
        return rows

    def _lemma_rows(self, trial: int, rng: np.random.Generator, d: int, m: int,
                    bruteforce: bool = False) -> List[ReportRow]:
        """
        Composition, splitting and insertion identities over m spectra with random grid kernels.
        With ``bruteforce`` both sides are summed over every multi-index and held to the brute-force tolerance.
        """
        rows: List[ReportRow] = []
        apply = moi_apply_bruteforce if bruteforce else moi_apply
        suffix = f",d={d},bruteforce" if bruteforce else ''
        tolerance = 'moi_bruteforce' if bruteforce else 'moi_lemma'
        spectra = [eigh(random_hermitian(rng, d)) for _ in range(m)]
        operands = random_operands(rng, d, m - 1)

        for slot in range(1, m):
            outer = GridKernel(random_grid_values(rng, [d] * m))
            inner = GridKernel(random_grid_values(rng, [d, d]))
            rows.append(self.residual_row(trial, f"moi_compose[m={m},j={slot}{suffix}]", tolerance,
                                          moi_compose_check(outer, inner, slot, spectra, operands, apply=apply)))

        for slot in range(2, m):
            left = GridKernel(random_grid_values(rng, [d] * slot))
            right = GridKernel(random_grid_values(rng, [d] * (m - slot + 1)))
            rows.append(self.residual_row(trial, f"moi_split[m={m},j={slot}{suffix}]", tolerance,
                                          moi_split_check(left, right, slot, spectra, operands, apply=apply)))

        for slot in range(1, m + 1):
            reduced = GridKernel(random_grid_values(rng, [d] * (m - 1)))
            rows.append(self.residual_row(trial, f"moi_insert[m={m},j={slot}{suffix}]", tolerance,
                                          moi_insert_check(reduced, slot, spectra, operands, apply=apply)))
        return rows


def _commuting_models(f: FunctionModel) -> List[FunctionModel]:
    """The configured function followed by exp and invquad, without repeats."""
    models: List[FunctionModel] = []
    for model in (f, Exp(1.0), InvQuad()):
        if str(model) not in {str(m) for m in models}:
            models.append(model)
    return models
