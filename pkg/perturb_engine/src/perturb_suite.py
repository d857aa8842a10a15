#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Perturbation checks for the experiment runner

One suite per subcommand: derivative formula against finite differences,
perturbation formula (with its first-order, commutator, telescoping and
path-derivative forms), Taylor remainders, continuity sweeps and the
boundedness ratio statistics.
"""

import logging
import statistics
from collections import defaultdict
from typing import Dict, List

import numpy as np

from calculus_errors import ConfigError, DivisionDegenerateError
from experiment_models import ExperimentSuite, ReportRow
from funcmodel_engine.src.function_models import Polynomial
from linalg_engine.src.spectral_linalg import HermitianMatrix, eigh, load_matrix, schatten_norm
from moi_engine.src.moi_contraction import IdentityResidual
from perturb_engine.src.perturbation import (
    PerturbationPath,
    boundedness_ratio,
    commutator_perturbation_residual,
    continuity_halving_ratio,
    derivative_report,
    first_order_difference_residual,
    moi_path_derivative_residual,
    perturbation_formula_residual,
    phi,
    polynomial_path_derivative,
    taylor_remainder,
    telescoping_residual,
)
from random_ensembles import random_hermitian, random_operands, random_perturbation, trial_generator

logger = logging.getLogger(__name__)

DERIVATIVE_TIMES = (0.0, 0.2)
DERIVATIVE_MAX_ORDER = 4
TELESCOPING_T = 0.3
PERTURBATION_NORM = 0.5
CONTINUITY_ORDER = 2


def _label(value: float) -> str:
    return f"{value:g}"


class PathSuite(ExperimentSuite):
    """Base for suites that work on a path t -> A + tK."""

    def _path(self, rng: np.random.Generator) -> PerturbationPath:
        """A and K from --matrix-a / --matrix-k when given, otherwise drawn from the trial generator."""
        d = self.config.dim
        a = self._matrix_file('matrix_a') if self.config.matrix_a else random_hermitian(rng, d)
        k = self._matrix_file('matrix_k') if self.config.matrix_k else random_perturbation(rng, d, PERTURBATION_NORM)
        return PerturbationPath(a, k, self.config.function.build())

    def _matrix_file(self, field: str) -> HermitianMatrix:
        try:
            matrix = load_matrix(getattr(self.config, field))
        except (OSError, ValueError) as e:
            raise ConfigError(field, f"cannot load matrix: {e}")
        if matrix.shape != (self.config.dim, self.config.dim):
            raise ConfigError(field, f"matrix is {matrix.rows}x{matrix.cols}, expected dim {self.config.dim}")
        return HermitianMatrix(matrix)

    def _orders(self) -> range:
        return range(2, max(self.config.order, 2) + 1)


class DerivativeSuite(PathSuite):
    """derivative_moi against Richardson finite differences, and exact algebra for polynomials."""

    name = 'derivative'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        path = self._path(rng)
        rows: List[ReportRow] = []
        max_order = min(self.config.order, DERIVATIVE_MAX_ORDER)
        for k in range(1, max_order + 1):
            tolerance = 'derivative_fourth_order' if k == 4 else 'derivative'
            for t in DERIVATIVE_TIMES:
                report = derivative_report(path, k, t, self.config.p_values, self.config.step)
                for p, error in report.schatten_errors.items():
                    lhs = schatten_norm(report.moi_value, p)
                    rhs = schatten_norm(report.fd_value, p)
                    rows.append(self.row(trial, f"derivative_vs_fd[k={k},p={_label(p)},t={_label(t)}]",
                                         tolerance, lhs, rhs, error * max(lhs, rhs), error))
                if isinstance(path.f, Polynomial):
                    exact = polynomial_path_derivative(path.f, path.a, path.k, k, t)
                    rows.append(self.residual_row(trial, f"derivative_polynomial_exact[k={k},t={_label(t)}]",
                                                  'derivative_polynomial', IdentityResidual(report.moi_value, exact)))
        return rows


class PerturbationSuite(PathSuite):
    """The perturbation formula for every slot, plus its first-order, commutator, telescoping and path forms."""

    name = 'perturb'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        d = self.config.dim
        f = self.config.function.build()
        p = self.primary_p
        rows: List[ReportRow] = []

        a = random_hermitian(rng, d)
        b = a + random_perturbation(rng, d, PERTURBATION_NORM)
        rows.append(self.residual_row(trial, f"first_order_difference[p={_label(p)}]", 'first_order_difference',
                                      first_order_difference_residual(a, b - a, f, p)))

        for n in self._orders():
            a_list = [random_hermitian(rng, d) for _ in range(n - 1)]
            k_list = random_operands(rng, d, n - 1)
            x = random_operands(rng, d, 1)[0]
            for slot in self._slots(n):
                rows.append(self.residual_row(
                    trial, f"perturbation_formula[n={n},j={slot},p={_label(p)}]", 'perturbation',
                    perturbation_formula_residual(a_list, a, b, f, n, slot, k_list, p)))
                rows.append(self.residual_row(
                    trial, f"commutator_perturbation[n={n},j={slot},p={_label(p)}]", 'commutator_perturbation',
                    commutator_perturbation_residual(a_list, a, b, f, n, slot, k_list, x, p)))

            path = PerturbationPath(a, b - a, f)
            x_list = random_operands(rng, d, n - 1)
            for slot in self._slots(n):
                rows.append(self.residual_row(
                    trial, f"telescoping[n={n},j={slot},p={_label(p)}]", 'telescoping',
                    telescoping_residual(path, n, slot, x_list, TELESCOPING_T, p)))
            rows.append(self.residual_row(
                trial, f"path_derivative[n={n},p={_label(p)}]", 'path_derivative',
                moi_path_derivative_residual(path, n, p), relative=True))
        return rows

    def _slots(self, n: int) -> List[int]:
        if self.config.slot is not None:
            return [self.config.slot] if self.config.slot <= n else []
        return list(range(1, n + 1))


class TaylorSuite(PathSuite):
    """Taylor remainder identity, vanishing remainders of low-degree polynomials, and the S^p estimate ratio."""

    name = 'taylor'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        path = self._path(rng)
        rows: List[ReportRow] = []
        degree = path.f.degree if isinstance(path.f, Polynomial) else None
        for n in self._orders():
            for p in self.config.p_values:
                remainder = taylor_remainder(path, n, p)
                tag = f"n={n},p={_label(p)}"
                rows.append(self.residual_row(trial, f"taylor_identity[{tag}]", 'taylor_identity', remainder.residual))

                if degree is not None and degree < n:
                    size = max(remainder.residual.lhs_norm, remainder.residual.rhs_norm)
                    scale = 1.0 + schatten_norm(phi(path, 1.0), p)
                    rows.append(self.row(trial, f"taylor_remainder_vanishes[{tag}]", 'taylor_polynomial',
                                         remainder.residual.lhs_norm, remainder.residual.rhs_norm,
                                         size, size / scale))

                if remainder.ratio is not None:
                    numerator = remainder.residual.lhs_norm
                    denominator = numerator / remainder.ratio if remainder.ratio > 0.0 else 0.0
                    rows.append(self.row(trial, f"taylor_ratio[{tag}]", 'ratio_cap', numerator, denominator,
                                         remainder.ratio, remainder.ratio))
        return rows

    def summarize(self, rows: List[ReportRow]) -> List[ReportRow]:
        return _stability_rows(self, rows, 'taylor_ratio', 'taylor_stability', 'taylor_stability')


class ContinuitySuite(PathSuite):
    """Halving the grid step of a sweep of φ^(k) must shrink the largest increment by 0.75 or better."""

    name = 'continuity'

    DEFAULT_STEP = 1e-2

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        path = self._path(rng)
        k = min(self.config.order, CONTINUITY_ORDER)
        p = self.primary_p
        step = self.config.step or self.DEFAULT_STEP
        coarse, fine, ratio = continuity_halving_ratio(path, k, self.config.t_range, step, p)
        return [self.row(trial, f"continuity_halving[k={k},p={_label(p)}]", 'continuity',
                         fine, coarse, fine, ratio)]


class RatioSuite(ExperimentSuite):
    """Empirical boundedness constants: the ratio per trial and its maximum over trials."""

    name = 'ratio'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        d = self.config.dim
        f = self.config.function.build()
        rows: List[ReportRow] = []
        for n in range(1, self.config.order + 1):
            spectra = [eigh(random_hermitian(rng, d)) for _ in range(n + 1)]
            operands = random_operands(rng, d, n)
            for p in self.config.p_values:
                try:
                    ratio = boundedness_ratio(f, n, spectra, operands, p)
                except DivisionDegenerateError as e:
                    logger.warning(f"Skipping boundedness ratio (trial {trial}): {e}")
                    continue
                rows.append(self.row(trial, f"boundedness_ratio[n={n},p={_label(p)}]", 'ratio_cap',
                                     ratio, 1.0, ratio, ratio))
        return rows

    def summarize(self, rows: List[ReportRow]) -> List[ReportRow]:
        summary: List[ReportRow] = []
        for check, values in _group(rows, 'boundedness_ratio').items():
            largest = max(values)
            summary.append(self.row(self.SUMMARY_TRIAL, f"boundedness_ratio_max[{check}]", 'ratio_cap',
                                    largest, statistics.median(values), largest, largest))
        return summary


def _group(rows: List[ReportRow], prefix: str) -> Dict[str, List[float]]:
    """rel_err of rows named ``prefix[...]``, grouped by the bracketed tag, in first-seen order."""
    groups: Dict[str, List[float]] = defaultdict(list)
    for row in rows:
        if row.check.startswith(prefix + '['):
            groups[row.check[len(prefix) + 1:-1]].append(row.rel_err)
    return groups


def _stability_rows(suite: ExperimentSuite, rows: List[ReportRow], prefix: str, name: str,
                    tolerance: str) -> List[ReportRow]:
    summary: List[ReportRow] = []
    for tag, values in _group(rows, prefix).items():
        median = statistics.median(values)
        largest = max(values)
        spread = largest / median if median > 0.0 else 0.0
        summary.append(suite.row(suite.SUMMARY_TRIAL, f"{name}[{tag}]", tolerance, largest, median,
                                 largest - median, spread))
    return summary
