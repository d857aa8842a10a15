#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Divided difference checks for the experiment runner.
"""

import logging
import math
from typing import List

import numpy as np

from ddiff_engine.src.divided_differences import (
    DividedDifferenceEvaluator,
    coincident_value,
    dd_simplex_oracle,
    product_sides,
    recursion_sides,
)
from experiment_models import ExperimentSuite, ReportRow
from funcmodel_engine.src.function_models import Interval, InvQuad, sup_norm_estimate
from random_ensembles import random_nodes, trial_generator

logger = logging.getLogger(__name__)

PERMUTATIONS = 20
SEPARATED_GAP = 0.1
SYMMETRY_GAP = 1e-3
CLUSTER_GAP = 1e-4
ORACLE_MAX_ORDER = 3
# Plain recursion at gap 1e-4 loses about eps / gap^n, too much beyond n = 2.
CLUSTER_MAX_ORDER = 2
NODE_RANGE = (-2.0, 2.0)


class DividedDifferenceSuite(ExperimentSuite):
    """Symmetry, coincident collapse, quadrature oracle, recursion and product identities, uniform bound."""

    name = 'ddiff'

    def run_trial(self, trial: int) -> List[ReportRow]:
        rng = trial_generator(self.config.seed, trial)
        f = self.config.function.build()
        g = InvQuad()
        evaluator = DividedDifferenceEvaluator(f)
        rows: List[ReportRow] = []

        for n in range(1, self.config.order + 1):
            # permutation symmetry
            nodes = random_nodes(rng, n + 1, *NODE_RANGE, min_gap=SYMMETRY_GAP)
            reference = evaluator(nodes)
            worst = max(abs(evaluator(nodes[rng.permutation(n + 1)]) - reference) for _ in range(PERMUTATIONS))
            rows.append(self.row(trial, f"ddiff_permutation_symmetry[n={n}]", 'ddiff_permutation',
                                 abs(reference), abs(reference), worst, worst / (1.0 + abs(reference))))

            # coincident collapse
            x = float(rng.uniform(*NODE_RANGE))
            collapsed = evaluator([x] * (n + 1))
            expected = coincident_value(f, x, n)
            error = abs(collapsed - expected)
            rows.append(self.row(trial, f"ddiff_coincident_collapse[n={n}]", 'ddiff_coincident',
                                 abs(collapsed), abs(expected), error, error / (1.0 + abs(expected))))

            # near-coincident cluster against exact coincidence
            if n <= CLUSTER_MAX_ORDER:
                clustered = evaluator(x + CLUSTER_GAP * np.arange(n + 1))
                error = abs(clustered - collapsed)
                rows.append(self.row(trial, f"ddiff_cluster_continuity[n={n}]", 'ddiff_cluster',
                                     abs(clustered), abs(collapsed), error, error / (1.0 + abs(collapsed))))

            separated = random_nodes(rng, n + 1, *NODE_RANGE, min_gap=SEPARATED_GAP)
            value = evaluator(separated)

            if n <= ORACLE_MAX_ORDER:
                oracle = dd_simplex_oracle(f, n, separated)
                error = abs(value - oracle)
                rows.append(self.row(trial, f"ddiff_simplex_oracle[n={n}]", 'ddiff_oracle',
                                     abs(value), abs(oracle), error, error / (1.0 + abs(value))))

            span = float(np.ptp(separated))
            for slot in range(1, n + 1):
                lhs, rhs = recursion_sides(f, separated, slot)
                error = abs(lhs - rhs)
                rows.append(self.row(trial, f"ddiff_recursion[n={n},j={slot}]", 'ddiff_recursion',
                                     abs(lhs), abs(rhs), error, error / (1.0 + abs(value) * span)))

            lhs, rhs = product_sides(f, g, separated)
            error = abs(lhs - rhs)
            rows.append(self.row(trial, f"ddiff_product_rule[n={n}]", 'ddiff_product',
                                 abs(lhs), abs(rhs), error, error / (1.0 + max(abs(lhs), abs(rhs)))))

            bound = sup_norm_estimate(f, n, Interval.hull(separated)) / math.factorial(n)
            excess = max(0.0, abs(value) - bound)
            rows.append(self.row(trial, f"ddiff_uniform_bound[n={n}]", 'ddiff_uniform_bound',
                                 abs(value), bound, excess, excess / (1.0 + bound), absolute=True))

        logger.debug(f"ddiff trial {trial}: {len(rows)} rows")
        return rows
