#!/usr/bin/env python3
"""
Risk Aggregation Experiment CLI
===============================

Runs the scenario-generation experiments and writes a CSV table plus a JSON
summary per run.

Usage:
    riskagg prob-curves --d-max 15 --beta 0.95,0.99 --out results/
    riskagg stability --d 5 --beta 0.95 --sizes 50,100,200 --reps 50 --workers 4
    riskagg effsize --d 2 --beta 0.95 --region orthant --sizes 500 --reps 500
    riskagg gen --d 2 --beta 0.95 --region orthant --n-risk 100 --seed 7 --out s.csv
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import jsonlines

from ..errors import ConfigError, DomainError, EmptyAggregationRegionError, InfeasibleProblemError, NumericError
from ..runner import PRESETS, ExperimentConfig, ExperimentKind, ExperimentRunner, load_config
from ..runner.config import REGION_CHOICES, MethodKind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SUBCOMMANDS = {
    'prob-curves': ExperimentKind.PROB_CURVES,
    'stability': ExperimentKind.STABILITY,
    'effsize': ExperimentKind.EFFSIZE,
    'gen': ExperimentKind.GENERATE,
}


def _list_of(cast):
    def parse(text: str) -> list:
        try:
            return [cast(part) for part in text.split(',') if part.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid list '{text}': {e}")
    parse.__name__ = f"{cast.__name__} list"
    return parse


def _target(text: str) -> float:
    return float(text.replace('Infinity', 'inf'))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='Master seed (default 0)')
    common.add_argument('--out', help='Output .csv file (JSON written alongside) or output directory')
    common.add_argument('--config', help='YAML or JSON config with ExperimentConfig keys')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Logging level for stderr diagnostics (default WARNING)')
    common.add_argument('--verbose', action='store_true', help='Show progress bars')
    common.add_argument('--trace', help='Write per-replication records to this JSONL file')
    common.add_argument('--workers', type=int, help='Parallel worker threads')

    beta = argparse.ArgumentParser(add_help=False)
    beta.add_argument('--beta', type=_list_of(float), help='Tail level(s), comma separated')

    parser = argparse.ArgumentParser(
        prog='riskagg',
        description="Scenario generation for tail risk: aggregation sampling experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Probability of the non-risk regions for d = 1..15
  riskagg prob-curves --d-max 15 --beta 0.95,0.99 --out results/

  # Optimality-gap stability study on a synthetic 5-asset market
  riskagg stability --d 5 --beta 0.95 --sizes 50,100,200,500 --reps 50

  # One-shot aggregation sampling to a scenario CSV
  riskagg gen --d 2 --beta 0.95 --region orthant --n-risk 100 --seed 7 --out s.csv
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    curves = subparsers.add_parser('prob-curves', parents=[common, beta],
                                   help='Non-risk-region probabilities by dimension')
    curves.add_argument('--d-max', type=int, help='Largest dimension (default 15)')
    curves.add_argument('--regions', type=_list_of(str), help=f'Region kinds from {REGION_CHOICES}')
    curves.add_argument('--rhos', type=_list_of(float), help='Equicorrelations for monotonic curves')
    curves.add_argument('--mc-samples', type=int, help='Monte Carlo draws per estimate')
    curves.add_argument('--survivor-samples', type=int, help='Survivor-function sample size')

    stability = subparsers.add_parser('stability', parents=[common, beta],
                                      help='Optimality-gap stability study')
    stability.add_argument('--d', type=int, help='Number of assets for the synthetic market')
    stability.add_argument('--t', type=_target, help='Target expected return (default 0.01, -inf drops it)')
    stability.add_argument('--no-budget', action='store_true', help='Drop the budget constraint sum(x) = 1')
    stability.add_argument('--returns', help='Returns CSV (rows = months, columns = assets)')
    stability.add_argument('--methods', type=_list_of(str),
                           help=f'Methods from {[m.value for m in MethodKind]}')
    stability.add_argument('--sizes', type=_list_of(int), help='Scenario-set sizes, increasing')
    stability.add_argument('--reps', type=int, help='Replications per size (default 50)')
    stability.add_argument('--preset', choices=sorted(PRESETS), help='Published problem size')
    stability.add_argument('--survivor-samples', type=int, help='Survivor-function sample size')
    stability.add_argument('--draw-cap', type=int, help='Aggregation sampling draw cap')

    effsize = subparsers.add_parser('effsize', parents=[common, beta],
                                    help='Effective sample size against n + nq/(1-q)')
    effsize.add_argument('--d', type=int, help='Dimension')
    effsize.add_argument('--region', choices=REGION_CHOICES, help='Region kind (default orthant)')
    effsize.add_argument('--rho', type=float, help='Equicorrelation of the Normal (default 0)')
    effsize.add_argument('--sizes', type=_list_of(int), help='Risk-scenario targets n')
    effsize.add_argument('--reps', type=int, help='Replications per n')
    effsize.add_argument('--mc-samples', type=int, help='Monte Carlo draws for q')
    effsize.add_argument('--survivor-samples', type=int, help='Survivor-function sample size')
    effsize.add_argument('--draw-cap', type=int, help='Aggregation sampling draw cap')

    gen = subparsers.add_parser('gen', parents=[common, beta], help='Aggregation sampling to a scenario CSV')
    gen.add_argument('--d', type=int, help='Dimension')
    gen.add_argument('--region', choices=REGION_CHOICES, help='Region kind (default orthant)')
    gen.add_argument('--rho', type=float, help='Equicorrelation of the Normal (default 0)')
    gen.add_argument('--n-risk', type=int, help='Risk scenarios to collect')
    gen.add_argument('--survivor-samples', type=int, help='Survivor-function sample size')
    gen.add_argument('--draw-cap', type=int, help='Aggregation sampling draw cap')

    parser.commands = {'prob-curves': curves, 'stability': stability, 'effsize': effsize, 'gen': gen}
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then config file, then preset, then command-line flags"""
    config = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, 'preset', None):
        config = config.updated(**PRESETS[args.preset])

    region = getattr(args, 'region', None)
    overrides: Dict[str, Any] = {
        'experiment': SUBCOMMANDS[args.command].value,
        'master_seed': args.seed,
        'log_level': args.log_level,
        'workers': args.workers,
        'betas': args.beta,
        'beta': args.beta[0] if args.beta else None,
        'd': getattr(args, 'd', None),
        'd_max': getattr(args, 'd_max', None),
        'rho': getattr(args, 'rho', None),
        'rhos': getattr(args, 'rhos', None),
        'regions': [region] if region else getattr(args, 'regions', None),
        'returns_path': getattr(args, 'returns', None),
        'methods': getattr(args, 'methods', None),
        'scenario_sizes': getattr(args, 'sizes', None),
        'n_replications': getattr(args, 'reps', None),
        'n_risk': getattr(args, 'n_risk', None),
        't': getattr(args, 't', None),
        'budget': False if getattr(args, 'no_budget', False) else None,
        'mc_samples': getattr(args, 'mc_samples', None),
        'survivor_samples': getattr(args, 'survivor_samples', None),
        'draw_cap': getattr(args, 'draw_cap', None),
    }
    return config.updated(**overrides)


def resolve_outputs(out: Optional[str], experiment: ExperimentKind, seed: int) -> Tuple[Path, Path]:
    """``--out x.csv`` names the CSV (JSON beside it); anything else is a directory"""
    if out and out.lower().endswith('.csv'):
        csv_path = Path(out)
    else:
        csv_path = Path(out or '.') / f"{experiment.value}_{seed}.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    return csv_path, csv_path.with_suffix('.json')


def write_json(path: Path, payload: Dict[str, Any]) -> None:
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')


def write_frame(path: Path, frame) -> None:
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')


def write_trace(path: str, records: List[Dict[str, Any]]) -> None:
    with jsonlines.open(path, mode='w', sort_keys=True) as writer:
        writer.write_all(records)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, str(level).upper()),
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True,
    )


def execute(config: ExperimentConfig, args: argparse.Namespace) -> None:
    """Run the configured experiment and write its outputs"""
    runner = ExperimentRunner(config, verbose=args.verbose)
    csv_path, json_path = resolve_outputs(args.out, config.experiment, config.master_seed)
    start_time = time.time()

    if config.experiment is ExperimentKind.GENERATE:
        report = runner.run_generate()
        report.scenario_set.to_csv(csv_path)
        summary = {
            'experiment': config.experiment.value,
            'n_scenarios': report.scenario_set.n,
            'region_kind': config.region_kinds[0],
            'config': config.to_json_dict(),
            **report.to_json_dict(),
        }
        trace = [report.to_json_dict()]
        headline = [
            f"  Scenarios: {report.scenario_set.n} ({report.n_risk} risk + 1 aggregated)",
            f"  Effective sample size: {report.effective_sample_size}",
        ]
    elif config.experiment is ExperimentKind.STABILITY:
        report = runner.run_stability()
        write_frame(csv_path, report.to_frame())
        summary = report.to_json_dict()
        trace = report.trace
        headline = [f"  {'Method':<16} {'Size':>6} {'Mean gap':>14} {'95% bar':>12}"]
        headline += [f"  {c.method:<16} {c.scenario_size:>6} {c.mean_gap:>14.6e} {c.ci95:>12.2e}"
                     for c in report.cells]
    else:
        result = runner.run()
        write_frame(csv_path, result.rows)
        summary = result.summary
        trace = result.trace
        headline = [f"  Rows: {result.rows.shape[0]}"]

    write_json(json_path, summary)
    if args.trace:
        write_trace(args.trace, trace)

    print(f"{config.experiment.value} complete in {time.time() - start_time:.2f} seconds")
    for line in headline:
        print(line)
    print(f"Results saved to: {csv_path} and {json_path}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = parser.commands[args.command]

    try:
        config = resolve_config(args)
    except ConfigError as e:
        subparser.error(str(e))
    if not config.betas:
        subparser.error("the following arguments are required: --beta")

    try:
        config.validate()
    except ConfigError as e:
        print(f"riskagg: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    configure_logging(config.log_level)
    try:
        execute(config, args)
    except (ConfigError, DomainError, OSError) as e:
        print(f"riskagg: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, InfeasibleProblemError, EmptyAggregationRegionError) as e:
        print(f"riskagg: numeric failure: {e}", file=sys.stderr)
        if args.verbose:
            logger.exception("experiment failed")
        return EXIT_NUMERIC
    return EXIT_OK


def cli_main(argv: Optional[List[str]] = None) -> int:
    return main(argv)


if __name__ == '__main__':
    sys.exit(main())
