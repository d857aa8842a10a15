#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Unit Tests for the experiment configuration and report rows
"""

import json
import os
import sys
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from calculus_errors import ConfigError
from env_loader import environment_settings
from experiment_models import (
    TOLERANCE_DEFAULTS,
    ExperimentConfig,
    ExperimentSuite,
    ReportRow,
    build_experiment_config,
)
from moi_engine.src.moi_contraction import IdentityResidual


class TestBuildConfig(unittest.TestCase):
    """Layering of YAML defaults, environment, JSON file and flags"""

    def test_defaults(self):
        config = build_experiment_config()
        self.assertEqual((config.seed, config.dim, config.order, config.trials), (0, 6, 3, 5))
        self.assertEqual(config.function.kind, 'exp')
        self.assertEqual(config.tolerance('derivative'), 1e-5)
        self.assertEqual(config.format, 'csv')

    def test_flags_override_and_none_is_ignored(self):
        config = build_experiment_config({'seed': 42, 'dim': None, 'p_values': [2.0]})
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.dim, 6)
        self.assertEqual(config.p_values, [2.0])

    def test_tolerance_overrides_merge(self):
        config = build_experiment_config({'tolerances': {'derivative': 1e-3}})
        self.assertEqual(config.tolerance('derivative'), 1e-3)
        self.assertEqual(config.tolerance('perturbation'), TOLERANCE_DEFAULTS['perturbation'])

    def test_json_file_layer(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'config.json')
            with open(path, 'w') as file:
                json.dump({'dim': 4, 'function': {'kind': 'sin', 'params': [2.0]},
                           'tolerances': {'moi_lemma': 1e-9}}, file)
            config = build_experiment_config({'dim': 5}, path)
        self.assertEqual(config.dim, 5)
        self.assertEqual(config.function.build().frequency, 2.0)
        self.assertEqual(config.tolerance('moi_lemma'), 1e-9)

    def test_environment_workers(self):
        config = build_experiment_config(environment={'workers': '3'})
        self.assertEqual(config.workers, 3)

    def test_environment_settings_strip_prefix(self):
        with patch.dict('os.environ', {'MOI_WORKERS': '2', 'MOI_LOG_LEVEL': 'INFO'}):
            settings = environment_settings()
        self.assertEqual(settings['workers'], '2')
        self.assertEqual(settings['log_level'], 'INFO')


class TestConfigErrors(unittest.TestCase):
    """Each invalid value is reported with the name of its field"""

    def assert_field(self, field, overrides=None, config_file=None):
        with self.assertRaises(ConfigError) as context:
            build_experiment_config(overrides, config_file)
        self.assertEqual(context.exception.field, field)

    def test_dimension_cap(self):
        self.assert_field('dim', {'dim': 65})

    def test_order_cap(self):
        self.assert_field('order', {'order': 5})

    def test_p_must_exceed_one(self):
        self.assert_field('p_values', {'p_values': [1.0]})

    def test_negative_seed(self):
        self.assert_field('seed', {'seed': -1})

    def test_unknown_tolerance(self):
        self.assert_field('tolerances.bogus', {'tolerances': {'bogus': 1.0}})

    def test_non_positive_tolerance(self):
        self.assert_field('tolerances', {'tolerances': {'derivative': 0.0}})

    def test_unknown_field(self):
        self.assert_field('colour', {'colour': 'red'})

    def test_slot_beyond_order(self):
        with self.assertRaises(ConfigError):
            build_experiment_config({'order': 2, 'slot': 3})

    def test_reversed_t_range(self):
        with self.assertRaises(ConfigError):
            build_experiment_config({'t_range': [1.0, -1.0]})

    def test_malformed_json_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'broken.json')
            with open(path, 'w') as file:
                file.write('{"dim": ')
            self.assert_field('config', config_file=path)

    def test_missing_root_config(self):
        config = build_experiment_config(environment={'config_path': '/nonexistent/experiment_config.yaml'})
        self.assertEqual(config.dim, 6)


class TestReportRow(unittest.TestCase):

    def test_relative_pass_rule(self):
        row = ReportRow.evaluate(0, 'check', 7, 1.0, 1.0, 5.0, 1e-10, 1e-9)
        self.assertTrue(row.passed)
        self.assertEqual(row.seed, 7)

    def test_absolute_pass_rule(self):
        row = ReportRow.evaluate(0, 'check', 7, 1.0, 1.0, 5.0, 1e-10, 1e-9, absolute=True)
        self.assertFalse(row.passed)

    def test_non_finite_error_fails(self):
        self.assertFalse(ReportRow.evaluate(0, 'check', 0, 1.0, 1.0, float('nan'), float('nan'), 1.0).passed)

    def test_record_uses_pass_key(self):
        record = ReportRow.evaluate(1, 'check', 0, 0.0, 0.0, 0.0, 0.0, 1e-9).as_record()
        self.assertIs(record['pass'], True)
        self.assertNotIn('passed', record)
        self.assertEqual(list(record), ['trial', 'check', 'lhs_norm', 'rhs_norm', 'abs_err', 'rel_err',
                                        'tolerance', 'pass'])


class TestExperimentSuite(unittest.TestCase):

    def test_primary_p_prefers_two(self):
        suite = ExperimentSuite(ExperimentConfig(p_values=[1.5, 2.0]))
        self.assertEqual(suite.primary_p, 2.0)
        suite = ExperimentSuite(ExperimentConfig(p_values=[3.0, 4.0]))
        self.assertEqual(suite.primary_p, 3.0)

    def test_residual_row(self):
        suite = ExperimentSuite(ExperimentConfig(seed=9))
        residual = IdentityResidual([[2.0]], [[1.0]])
        row = suite.residual_row(0, 'x', 'perturbation', residual)
        self.assertAlmostEqual(row.rel_err, 1.0 / 3.0)
        relative = suite.residual_row(0, 'x', 'perturbation', residual, relative=True)
        self.assertAlmostEqual(relative.rel_err, 0.5)
        self.assertEqual(row.seed, 9)
        self.assertFalse(row.passed)

    def test_exact_row_needs_identical_arrays(self):
        suite = ExperimentSuite(ExperimentConfig())
        same = suite.exact_row(0, 'x', np.array([1.0, 2.0]), np.array([1.0, 2.0]))
        self.assertTrue(same.passed)
        self.assertEqual((same.tolerance, same.abs_err), (0.0, 0.0))
        nudged = suite.exact_row(0, 'x', np.array([1.0, 2.0]), np.array([np.nextafter(1.0, 2.0), 2.0]))
        self.assertFalse(nudged.passed)
        self.assertGreater(nudged.abs_err, 0.0)
        self.assertFalse(suite.exact_row(0, 'x', np.zeros(2), np.zeros(3)).passed)


if __name__ == '__main__':
    unittest.main()
