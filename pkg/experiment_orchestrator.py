#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Experiment Orchestrator - Routes subcommands to the engine suites

Each engine owns its checks (``ddiff_engine``, ``moi_engine``,
``perturb_engine``); the orchestrator only routes a subcommand to the
matching suites, runs their trials and streams the rows to a report writer
in trial order.
"""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Type

# Add project directory to path for module imports if needed
current_dir = Path(__file__).parent
if str(current_dir) not in sys.path:
    sys.path.insert(0, str(current_dir))

from ddiff_engine.src.ddiff_suite import DividedDifferenceSuite
from experiment_models import ExperimentConfig, ExperimentSuite, ReportRow
from moi_engine.src.moi_suite import MOISuite
from perturb_engine.src.perturb_suite import (
    ContinuitySuite,
    DerivativeSuite,
    PerturbationSuite,
    RatioSuite,
    TaylorSuite,
)
from report_writer import ReportWriter

logger = logging.getLogger(__name__)

SUITES: Dict[str, Type[ExperimentSuite]] = {
    'ddiff': DividedDifferenceSuite,
    'moi': MOISuite,
    'derivative': DerivativeSuite,
    'perturb': PerturbationSuite,
    'taylor': TaylorSuite,
    'continuity': ContinuitySuite,
    'ratio': RatioSuite,
}

SUBCOMMANDS = list(SUITES) + ['suite']


class ExperimentOrchestrator:
    """
    Runs the suites behind a subcommand.

    Trials may run on a thread pool (``config.workers``); their rows are
    buffered and written in trial order, so the report does not depend on
    scheduling.
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def suites_for(self, subcommand: str) -> List[ExperimentSuite]:
        if subcommand == 'suite':
            return [suite(self.config) for suite in SUITES.values()]
        if subcommand not in SUITES:
            raise ValueError(f"Unknown subcommand: {subcommand}")
        return [SUITES[subcommand](self.config)]

    def run_suite(self, suite: ExperimentSuite, writer: ReportWriter) -> List[ReportRow]:
        logger.info(f"Running {suite.name}: {self.config.trials} trials, dim {self.config.dim}, order {self.config.order}")
        trials = range(self.config.trials)
        collected: List[ReportRow] = []
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                # map yields results in submission order
                for rows in executor.map(suite.run_trial, trials):
                    self._emit(rows, writer, collected)
        else:
            for trial in trials:
                self._emit(suite.run_trial(trial), writer, collected)
        self._emit(suite.summarize(collected), writer, collected)
        return collected

    @staticmethod
    def _emit(rows: List[ReportRow], writer: ReportWriter, collected: List[ReportRow]) -> None:
        for row in rows:
            writer.write(row)
        collected.extend(rows)

    def run(self, subcommand: str, writer: ReportWriter) -> bool:
        """
        Run every suite of ``subcommand``.

        Returns:
            bool: True if every emitted row passed
        """
        passed = True
        for suite in self.suites_for(subcommand):
            rows = self.run_suite(suite, writer)
            failed = [row for row in rows if not row.passed]
            if failed:
                passed = False
                logger.warning(f"{suite.name}: {len(failed)} of {len(rows)} rows failed, first {failed[0].check}")
            else:
                logger.info(f"{suite.name}: all {len(rows)} rows passed")
        return passed
