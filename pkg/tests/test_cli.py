#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Tests for the command-line runner

Small dimensions and single trials keep each run short; the exit-status
contract and the reproducibility of reports are what is checked here.
"""

import csv
import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from unittest.mock import patch

# Add the project root to the path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import cli
from experiment_orchestrator import SUBCOMMANDS, ExperimentOrchestrator
from experiment_models import build_experiment_config
from report_writer import ReportWriter


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def run_cli(self, *argv):
        stderr = io.StringIO()
        with patch('sys.stderr', stderr):
            status = cli.main(list(argv))
        return status, stderr.getvalue()

    def read_csv(self, name):
        with open(self.path(name), newline='') as file:
            return list(csv.DictReader(file))


class TestExitStatus(CliTestCase):

    def test_passing_run_exits_zero(self):
        status, _ = self.run_cli('moi', '--dim', '3', '--order', '2', '--trials', '1', '--out', self.path('moi.csv'))
        self.assertEqual(status, 0)
        rows = self.read_csv('moi.csv')
        self.assertTrue(rows)
        self.assertTrue(all(row['pass'] == 'true' for row in rows))
        self.assertEqual(list(rows[0]), ['trial', 'check', 'lhs_norm', 'rhs_norm', 'abs_err', 'rel_err',
                                        'tolerance', 'pass'])

    def test_seeded_suite_exits_zero(self):
        status, stderr = self.run_cli('suite', '--seed', '42', '--dim', '6', '--order', '3', '--trials', '1',
                                      '--out', self.path('suite.csv'))
        self.assertEqual(status, 0, stderr)
        rows = self.read_csv('suite.csv')
        failed = [row['check'] for row in rows if row['pass'] != 'true']
        self.assertEqual(failed, [])
        families = {row['check'].split('[')[0].split('_')[0] for row in rows}
        self.assertTrue({'ddiff', 'moi', 'derivative', 'perturbation', 'taylor', 'continuity',
                         'boundedness'} <= families)

    def test_forced_failure_exits_one(self):
        status, _ = self.run_cli('derivative', '--dim', '3', '--order', '1', '--trials', '1',
                                 '--tolerance', 'derivative=1e-300', '--out', self.path('fail.csv'))
        self.assertEqual(status, 1)
        rows = self.read_csv('fail.csv')
        self.assertTrue(any(row['pass'] == 'false' for row in rows))

    def test_zero_tolerance_is_a_config_error(self):
        status, stderr = self.run_cli('ddiff', '--tolerance', 'ddiff_oracle=0')
        self.assertEqual(status, 2)
        self.assertIn('tolerances', stderr)

    def test_malformed_config_file_names_field(self):
        config = self.path('bad.json')
        with open(config, 'w') as file:
            json.dump({'dim': 'six'}, file)
        status, stderr = self.run_cli('ddiff', '--config', config)
        self.assertEqual(status, 2)
        self.assertIn('dim', stderr)

    def test_bad_flag_values(self):
        for argv in (('ddiff', '--p', '1.5,x'), ('ddiff', '--function', 'bogus:1'),
                     ('ddiff', '--tolerance', 'derivative'), ('ddiff', '--order', '9'),
                     ('ddiff', '--tolerance', 'nonsense=1e-3')):
            status, _ = self.run_cli(*argv)
            self.assertEqual(status, 2, argv)

    def test_unreadable_matrix_file(self):
        status, stderr = self.run_cli('derivative', '--dim', '3', '--trials', '1',
                                      '--matrix-a', self.path('missing.json'), '--out', self.path('x.csv'))
        self.assertEqual(status, 2)
        self.assertIn('matrix_a', stderr)

    def test_non_convergence_exits_three(self):
        stalled = {'jacobi': {'offdiag_rtol': 1e-13, 'max_sweeps': 0}}
        with patch('linalg_engine.src.spectral_linalg._solver_config', return_value=stalled):
            status, stderr = self.run_cli('moi', '--dim', '3', '--order', '1', '--trials', '1',
                                          '--out', self.path('nc.csv'))
        self.assertEqual(status, 3)
        self.assertIn('non-convergence', stderr)

    def test_unknown_subcommand(self):
        with self.assertRaises(SystemExit) as context:
            cli.main(['integrate'])
        self.assertEqual(context.exception.code, 2)


class TestReports(CliTestCase):

    def test_same_seed_gives_identical_bytes(self):
        args = ('ddiff', '--seed', '42', '--order', '2', '--trials', '2')
        self.run_cli(*args, '--out', self.path('a.csv'))
        self.run_cli(*args, '--workers', '2', '--out', self.path('b.csv'))
        with open(self.path('a.csv'), 'rb') as first, open(self.path('b.csv'), 'rb') as second:
            self.assertEqual(first.read(), second.read())

    def test_different_seeds_differ(self):
        self.run_cli('ddiff', '--seed', '1', '--order', '1', '--trials', '1', '--out', self.path('a.csv'))
        self.run_cli('ddiff', '--seed', '2', '--order', '1', '--trials', '1', '--out', self.path('b.csv'))
        with open(self.path('a.csv'), 'rb') as first, open(self.path('b.csv'), 'rb') as second:
            self.assertNotEqual(first.read(), second.read())

    def test_low_degree_taylor_remainder_is_zero(self):
        status, _ = self.run_cli('taylor', '--function', 'poly:1,0,0', '--order', '3', '--dim', '4',
                                 '--trials', '1', '--p', '2', '--format', 'json', '--out', self.path('t.json'))
        with open(self.path('t.json')) as file:
            document = json.load(file)
        vanishing = [row for row in document['rows'] if row['check'].startswith('taylor_remainder_vanishes')]
        self.assertEqual([row['check'] for row in vanishing], ['taylor_remainder_vanishes[n=3,p=2]'])
        self.assertLessEqual(vanishing[0]['rel_err'], 1e-12)
        self.assertEqual(document['header']['function'], {'kind': 'poly', 'params': [1.0, 0.0, 0.0]})
        self.assertEqual(status, 0)

    def test_json_header_carries_resolved_config(self):
        self.run_cli('ddiff', '--seed', '7', '--order', '1', '--trials', '1', '--format', 'json',
                     '--out', self.path('h.json'))
        with open(self.path('h.json')) as file:
            header = json.load(file)['header']
        self.assertEqual(header['seed'], 7)
        self.assertEqual(header['order'], 1)
        self.assertIn('ddiff_oracle', header['tolerances'])

    def test_rows_stream_in_trial_order(self):
        self.run_cli('ddiff', '--order', '1', '--trials', '3', '--workers', '3', '--out', self.path('o.csv'))
        trials = [int(row['trial']) for row in self.read_csv('o.csv')]
        self.assertEqual(trials, sorted(trials))
        self.assertEqual(set(trials), {0, 1, 2})

    def test_slot_restricts_perturbation_rows(self):
        self.run_cli('perturb', '--dim', '3', '--order', '2', '--trials', '1', '--slot', '2',
                     '--out', self.path('s.csv'))
        checks = [row['check'] for row in self.read_csv('s.csv')]
        formula = [check for check in checks if check.startswith('perturbation_formula')]
        self.assertEqual(formula, ['perturbation_formula[n=2,j=2,p=2]'])


class TestOrchestrator(unittest.TestCase):

    def test_suite_runs_every_family(self):
        orchestrator = ExperimentOrchestrator(build_experiment_config({'dim': 2, 'order': 1, 'trials': 1}))
        names = [suite.name for suite in orchestrator.suites_for('suite')]
        self.assertEqual(names, [name for name in SUBCOMMANDS if name != 'suite'])

    def test_unknown_subcommand(self):
        orchestrator = ExperimentOrchestrator(build_experiment_config())
        with self.assertRaises(ValueError):
            orchestrator.suites_for('integrate')

    def test_ratio_summary_rows(self):
        config = build_experiment_config({'dim': 3, 'order': 1, 'trials': 2, 'p_values': [2.0]})
        stream = io.StringIO()
        writer = ReportWriter(stream, 'csv', config.header())
        passed = ExperimentOrchestrator(config).run('ratio', writer)
        writer.close()
        rows = list(csv.DictReader(io.StringIO(stream.getvalue())))
        self.assertTrue(passed)
        self.assertEqual(rows[-1]['trial'], '-1')
        self.assertEqual(rows[-1]['check'], 'boundedness_ratio_max[n=1,p=2]')


if __name__ == '__main__':
    unittest.main()
