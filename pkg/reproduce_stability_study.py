#!/usr/bin/env python3
"""
Stability Study Reproduction
============================

Runs the optimality-gap stability study at both reference problem sizes
(5 assets at beta = 0.95, 10 assets at beta = 0.99) on synthetic markets and
checks the two expected orderings:

1. Aggregation sampling with the exact cone region has a mean gap no larger
   than plain sampling at every scenario-set size
2. Its standard error is no larger than with the conservative monotonic
   region at the largest size
"""

import argparse
import json
import sys
import time
from typing import Any, Dict, List

from riskagg.metrics import StabilityMetrics
from riskagg.runner import ExperimentRunner, StabilityReport, preset

METHODS = ['sampling', 'agg_monotonic', 'agg_cone']


def check_orderings(report: StabilityReport, sizes: List[int]) -> Dict[str, Any]:
    """Evaluate the expected gap orderings of one study"""
    cone_beats_sampling = {
        size: report.cell('agg_cone', size).mean_gap <= report.cell('sampling', size).mean_gap
        for size in sizes
    }
    largest = sizes[-1]
    cone_se = report.cell('agg_cone', largest).std_error
    monotonic_se = report.cell('agg_monotonic', largest).std_error
    return {
        'cone_beats_sampling': cone_beats_sampling,
        'cone_se_at_most_monotonic': cone_se <= monotonic_se,
        'sampling_gap_inversions': StabilityMetrics.count_inversions(report.mean_gaps('sampling')),
    }


def run_study(name: str, reps: int, workers: int, verbose: bool) -> Dict[str, Any]:
    config = preset(name).updated(methods=METHODS, n_replications=reps, workers=workers)
    print(f"\n🔬 {name}: d={config.d}, beta={config.betas[0]}, sizes={config.scenario_sizes}, reps={reps}")

    start_time = time.time()
    report = ExperimentRunner(config, verbose=verbose).run_stability()
    elapsed = time.time() - start_time

    print(f"   Exact optimum v* = {report.exact['v_star']:.8g} ({elapsed:.1f}s)")
    print(f"   {'Method':<16}" + ''.join(f"{s:>14}" for s in config.scenario_sizes))
    for method in METHODS:
        print(f"   {method:<16}" + ''.join(f"{g:>14.4e}" for g in report.mean_gaps(method)))

    checks = check_orderings(report, config.scenario_sizes)
    for size, ok in checks['cone_beats_sampling'].items():
        print(f"   {'✅' if ok else '❌'} size {size}: agg_cone mean gap <= sampling")
    ok = checks['cone_se_at_most_monotonic']
    print(f"   {'✅' if ok else '❌'} size {config.scenario_sizes[-1]}: agg_cone SE <= agg_monotonic SE")

    return {
        'report': report.to_json_dict(),
        'checks': {**checks, 'cone_beats_sampling': {str(k): v for k, v in checks['cone_beats_sampling'].items()}},
        'elapsed_seconds': elapsed,
    }


def main():
    parser = argparse.ArgumentParser(description="Reproduce the optimality-gap stability study")
    parser.add_argument('--reps', type=int, default=50, help='Replications per scenario size')
    parser.add_argument('--workers', type=int, default=4, help='Parallel worker threads')
    parser.add_argument('--presets', default='d5_beta95,d10_beta99', help='Comma separated preset names')
    parser.add_argument('--output', default='stability_study_results.json', help='Results JSON')
    parser.add_argument('--verbose', action='store_true', help='Show progress bars')
    args = parser.parse_args()

    print("🚀 Starting Stability Study Reproduction")
    print("=" * 50)

    results = {}
    try:
        for name in args.presets.split(','):
            results[name] = run_study(name.strip(), args.reps, args.workers, args.verbose)
    except KeyboardInterrupt:
        print("\n⚠️  Study interrupted by user")
        sys.exit(1)

    with open(args.output, 'w') as f:
        json.dump(results, f, indent=2, sort_keys=True)

    all_ok = all(
        all(r['checks']['cone_beats_sampling'].values()) and r['checks']['cone_se_at_most_monotonic']
        for r in results.values()
    )
    print("\n" + "=" * 50)
    print(f"{'✅ All orderings hold' if all_ok else '❌ Some orderings do not hold'}")
    print(f"📊 Results saved to {args.output}")


if __name__ == '__main__':
    main()
