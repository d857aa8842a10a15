#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Tests for the experiment suites

Row naming and tolerances of the MOI and perturbation suites, plus the
statistical checks that only show up over many seeded trials.
"""

import os
import statistics
import sys
import unittest

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from experiment_models import ExperimentConfig
from funcmodel_engine.src.function_models import FunctionSpec
from moi_engine.src.moi_suite import MOISuite
from perturb_engine.src.perturb_suite import ContinuitySuite, DerivativeSuite, RatioSuite, TaylorSuite


def run_suite(suite):
    rows = []
    for trial in range(suite.config.trials):
        rows.extend(suite.run_trial(trial))
    return rows + suite.summarize(rows)


def by_check(rows):
    return {row.check: row for row in rows}


class TestMOISuite(unittest.TestCase):

    def setUp(self):
        self.rows = run_suite(MOISuite(ExperimentConfig(seed=3, dim=3, order=2, trials=1)))
        self.checks = by_check(self.rows)

    def test_every_row_passes(self):
        failed = [row.check for row in self.rows if not row.passed]
        self.assertEqual(failed, [])

    def test_grid_and_tensor_kernels_are_identical(self):
        row = self.checks['moi_grid_tensor_bitwise[n=2]']
        self.assertTrue(row.passed)
        self.assertEqual(row.tolerance, 0.0)
        self.assertEqual(row.abs_err, 0.0)

    def test_commuting_rows_cover_exp_and_invquad(self):
        commuting = [check for check in self.checks if check.startswith('moi_commuting[')]
        self.assertEqual(commuting, ['moi_commuting[f=exp(1),n=1]', 'moi_commuting[f=exp(1),n=2]',
                                     'moi_commuting[f=invquad,n=1]', 'moi_commuting[f=invquad,n=2]'])

    def test_configured_function_is_added_to_the_commuting_pair(self):
        config = ExperimentConfig(seed=3, dim=3, order=1, trials=1, function=FunctionSpec(kind='sin', params=[1.0]))
        checks = [row.check for row in MOISuite(config).run_trial(0) if row.check.startswith('moi_commuting[')]
        self.assertEqual(checks, ['moi_commuting[f=sin(1),n=1]', 'moi_commuting[f=exp(1),n=1]',
                                  'moi_commuting[f=invquad,n=1]'])

    def test_lemma_rows_are_also_summed_by_brute_force(self):
        summed = [check for check in self.checks if check.endswith(',d=2,bruteforce]')]
        self.assertEqual(sorted(summed), sorted([
            'moi_compose[m=3,j=1,d=2,bruteforce]', 'moi_compose[m=3,j=2,d=2,bruteforce]',
            'moi_split[m=3,j=2,d=2,bruteforce]',
            'moi_insert[m=3,j=1,d=2,bruteforce]', 'moi_insert[m=3,j=2,d=2,bruteforce]',
            'moi_insert[m=3,j=3,d=2,bruteforce]',
        ]))
        for check in summed:
            self.assertEqual(self.checks[check].tolerance, 1e-12)


class TestPerturbationSuites(unittest.TestCase):

    def test_continuity_uses_second_derivative(self):
        config = ExperimentConfig(seed=5, dim=4, order=3, trials=1, p_values=[2.0])
        rows = ContinuitySuite(config).run_trial(0)
        self.assertEqual([row.check for row in rows], ['continuity_halving[k=2,p=2]'])
        self.assertTrue(rows[0].passed, rows[0])
        self.assertLessEqual(rows[0].rel_err, 0.75)

    def test_fourth_order_derivative_rows_use_their_own_tolerance(self):
        config = ExperimentConfig(seed=5, dim=4, order=4, trials=1, p_values=[2.0])
        rows = DerivativeSuite(config).run_trial(0)
        fourth = [row for row in rows if row.check.startswith('derivative_vs_fd[k=4,')]
        self.assertEqual(len(fourth), 2)
        for row in fourth:
            self.assertEqual(row.tolerance, config.tolerance('derivative_fourth_order'))
            self.assertTrue(row.passed, row)
        third = [row for row in rows if row.check.startswith('derivative_vs_fd[k=3,')]
        self.assertTrue(all(row.tolerance == config.tolerance('derivative') for row in third))


class TestStatisticalChecks(unittest.TestCase):
    """Over 100 trials the extreme statistics settle down"""

    TRIALS = 100

    def test_boundedness_ratio_maximum_is_stable_across_seeds(self):
        maxima = []
        for seed in (11, 12):
            config = ExperimentConfig(seed=seed, dim=6, order=2, trials=self.TRIALS, p_values=[2.0])
            checks = by_check(run_suite(RatioSuite(config)))
            row = checks['boundedness_ratio_max[n=2,p=2]']
            self.assertEqual(row.trial, -1)
            self.assertTrue(row.passed)
            maxima.append(row.lhs_norm)
        self.assertLessEqual(abs(maxima[0] / maxima[1] - 1.0), 0.2, maxima)

    def test_taylor_ratio_stays_within_ten_medians(self):
        config = ExperimentConfig(seed=21, dim=4, order=2, trials=self.TRIALS, p_values=[2.0])
        rows = run_suite(TaylorSuite(config))
        ratios = [row.rel_err for row in rows if row.check == 'taylor_ratio[n=2,p=2]']
        self.assertEqual(len(ratios), self.TRIALS)
        median = statistics.median(ratios)
        self.assertLessEqual(max(ratios), 10.0 * median)
        summary = by_check(rows)['taylor_stability[n=2,p=2]']
        self.assertTrue(summary.passed)
        self.assertLessEqual(summary.rel_err, 10.0)


if __name__ == '__main__':
    unittest.main()
