#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Experiment Runner Entry Point

Seeded, configurable runner exposing every check as a subcommand:

    python cli.py suite --seed 42 --dim 6 --order 3
    python cli.py taylor --function poly:1,0,0 --order 3 --format json

Exit status: 0 when every row passes, 1 when a row fails, 2 on a
configuration error, 3 when the eigensolver does not converge.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from calculus_errors import CalculusError, ConfigError, NonConvergenceError
from env_loader import environment_settings, load_environment
from experiment_models import build_experiment_config
from experiment_orchestrator import SUBCOMMANDS, ExperimentOrchestrator
from funcmodel_engine.src.function_models import parse_function_spec
from report_writer import ReportWriter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

SUBCOMMAND_HELP = {
    'ddiff': 'divided difference identities and oracles',
    'moi': 'multiple operator integral contraction and its algebra',
    'derivative': 'derivative formula against finite differences',
    'perturb': 'higher-order perturbation formula',
    'taylor': 'Taylor remainder representation and estimate',
    'continuity': 'continuity sweeps of the k-th derivative',
    'ratio': 'boundedness ratio statistics',
    'suite': 'all of the above',
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with experiment settings')
    common.add_argument('--seed', type=int, help='64-bit unsigned seed')
    common.add_argument('--dim', type=int, help='matrix dimension (<= 64)')
    common.add_argument('--order', type=int, help='order n (<= 4)')
    common.add_argument('--p', dest='p_values', help='Schatten exponents, e.g. 1.5,2,4')
    common.add_argument('--function', help='function model kind:params, e.g. exp:1 or poly:1,0,0')
    common.add_argument('--trials', type=int, help='number of seeded trials')
    common.add_argument('--tolerance', action='append', default=[], metavar='NAME=VALUE',
                        help='override a tolerance (repeatable)')
    common.add_argument('--slot', type=int, help='restrict slot j of the perturbation checks')
    common.add_argument('--step', type=float, help='finite-difference or sweep step')
    common.add_argument('--t-range', dest='t_range', help='sweep interval a,b')
    common.add_argument('--matrix-a', dest='matrix_a', help='matrix file for A')
    common.add_argument('--matrix-k', dest='matrix_k', help='matrix file for K')
    common.add_argument('--workers', type=int, help='threads for running trials')
    common.add_argument('--out', help='report file (default stdout)')
    common.add_argument('--format', choices=['csv', 'json'], help='report format')
    common.add_argument('--log-level', dest='log_level', help='logging level (default WARNING)')

    parser = argparse.ArgumentParser(description='Multiple operator integral experiment runner')
    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=SUBCOMMAND_HELP[name])
    return parser


def _float_list(text: str, field: str) -> List[float]:
    try:
        return [float(token) for token in text.split(',') if token.strip()]
    except ValueError:
        raise ConfigError(field, f"expected comma-separated numbers, got '{text}'")


def _tolerances(pairs: List[str]) -> Dict[str, float]:
    tolerances: Dict[str, float] = {}
    for pair in pairs:
        name, separator, value = pair.partition('=')
        if not separator:
            raise ConfigError('tolerances', f"expected NAME=VALUE, got '{pair}'")
        try:
            tolerances[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerances.{name.strip()}", f"not a number: '{value}'")
    return tolerances


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """CLI flags as ExperimentConfig fields; unset flags are None."""
    overrides: Dict[str, Any] = {
        'seed': args.seed,
        'dim': args.dim,
        'order': args.order,
        'trials': args.trials,
        'slot': args.slot,
        'step': args.step,
        'workers': args.workers,
        'out': args.out,
        'format': args.format,
        'matrix_a': args.matrix_a,
        'matrix_k': args.matrix_k,
    }
    if args.p_values:
        overrides['p_values'] = _float_list(args.p_values, 'p_values')
    if args.t_range:
        overrides['t_range'] = _float_list(args.t_range, 't_range')
    if args.function:
        try:
            overrides['function'] = parse_function_spec(args.function).model_dump()
        except ValueError as e:
            raise ConfigError('function', str(e).splitlines()[0])
    if args.tolerance:
        overrides['tolerances'] = _tolerances(args.tolerance)
    return overrides


def configure_logging(level_name: Optional[str]) -> None:
    level = getattr(logging, (level_name or 'WARNING').upper(), None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(format=LOG_FORMAT, level=level, stream=sys.stderr)


def run(subcommand: str, args: argparse.Namespace) -> int:
    """Resolve the configuration, run the subcommand and return the exit status."""
    load_environment()
    settings = environment_settings()
    configure_logging(args.log_level or settings.get('log_level'))

    try:
        config = build_experiment_config(collect_overrides(args), args.config, settings)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    stream = open(config.out, 'w', newline='') if config.out else sys.stdout
    writer = ReportWriter(stream, config.format, config.header())
    try:
        passed = ExperimentOrchestrator(config).run(subcommand, writer)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as e:
        logger.error(f"Numerical non-convergence: {e}")
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except CalculusError as e:
        logger.error(f"{subcommand} aborted: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        writer.close()
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK if passed else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    """Start the runner"""
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args)


if __name__ == '__main__':
    sys.exit(main())
