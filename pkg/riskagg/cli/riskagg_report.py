#!/usr/bin/env python3
"""
Stability Report CLI
====================

Tabulate a stability-study JSON written by ``riskagg stability``.

Usage:
    riskagg-report results/stability_0.json
"""

import argparse
import json
import sys
from collections import defaultdict
from typing import Any, Dict, List, Optional

EXIT_OK = 0
EXIT_INPUT = 2


def load_results(results_path: str) -> Dict[str, Any]:
    """Load a stability JSON; raises ValueError for other experiments"""
    with open(results_path, 'r') as f:
        data = json.load(f)
    if data.get('experiment') != 'stability':
        raise ValueError(f"{results_path} is not a stability report (experiment={data.get('experiment')})")
    return data


def print_problem(data: Dict[str, Any]):
    print("=" * 80)
    print("PROBLEM")
    print("=" * 80)

    problem, exact = data['problem'], data['exact']
    print(f"Assets: {len(problem['mu'])}")
    print(f"Beta: {problem['beta']}")
    print(f"Target return: {problem['t']}")
    print(f"Budget constraint: {'on' if problem['budget'] else 'off'}")
    print(f"Exact optimum v*: {exact['v_star']:.10g}")
    print(f"Return multiplier: {exact.get('return_multiplier', 0.0):.6g}")
    print(f"Exact portfolio: [{', '.join(f'{x:.4f}' for x in exact['x_star'])}]")


def print_gap_table(cells: List[Dict[str, Any]]):
    print(f"\n{'=' * 80}")
    print("MEAN OPTIMALITY GAP (95% error bar)")
    print(f"{'=' * 80}")

    by_method = defaultdict(dict)
    for c in cells:
        by_method[c['method']][c['scenario_size']] = c
    sizes = sorted({c['scenario_size'] for c in cells})

    header = f"{'Method':<16}" + ''.join(f"{s:>20}" for s in sizes)
    print(header)
    print('-' * len(header))
    for method, row in by_method.items():
        cols = ''.join(f"{row[s]['mean_gap']:>11.3e} ±{row[s]['ci95']:<7.1e}" if s in row else f"{'-':>20}"
                       for s in sizes)
        print(f"{method:<16}{cols}")

    print(f"\n{'Method':<16} {'Size':>6} {'Eff. size':>10} {'Scenarios':>10} {'Violations':>11} {'Discards':>9}")
    for c in cells:
        print(f"{c['method']:<16} {c['scenario_size']:>6} {c['mean_effective_sample_size']:>10.1f} "
              f"{c['mean_scenarios']:>10.1f} {c['return_violations']:>11} {c['discards']:>9}")


def print_q_estimates(q_estimates: Dict[str, Dict[str, float]]):
    print(f"\n{'=' * 80}")
    print("AGGREGATION REGION PROBABILITY q")
    print(f"{'=' * 80}")
    if not q_estimates:
        print("No aggregation methods in this run")
    for method, est in q_estimates.items():
        print(f"  {method:<16} q = {est['q']:.4f} (se {est['std_error']:.1e}, {est['draws']:,} draws)")


def print_ordering(cells: List[Dict[str, Any]], baseline: str = 'sampling', challenger: str = 'agg_cone'):
    """Check that the challenger's mean gap is at most the baseline's at every size"""
    print(f"\n{'=' * 80}")
    print("ORDERING")
    print(f"{'=' * 80}")

    base = {c['scenario_size']: c['mean_gap'] for c in cells if c['method'] == baseline}
    chal = {c['scenario_size']: c['mean_gap'] for c in cells if c['method'] == challenger}
    shared = sorted(set(base) & set(chal))
    if not shared:
        print(f"Methods {baseline} and {challenger} not both present")
        return
    for size in shared:
        mark = "✅" if chal[size] <= base[size] else "❌"
        print(f"  {mark} size {size}: {challenger} {chal[size]:.3e} vs {baseline} {base[size]:.3e}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        description="Tabulate a riskagg stability-study report",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Example:
  riskagg-report results/stability_0.json
        """
    )
    parser.add_argument('results', help='Stability JSON written by riskagg stability')
    parser.add_argument('--baseline', default='sampling', help='Baseline method for the ordering check')
    parser.add_argument('--challenger', default='agg_cone', help='Method compared against the baseline')
    args = parser.parse_args(argv)

    try:
        data = load_results(args.results)
    except (OSError, ValueError) as e:
        print(f"Error loading results {args.results}: {e}", file=sys.stderr)
        return EXIT_INPUT

    print_problem(data)
    print_gap_table(data['cells'])
    print_q_estimates(data['q_estimates'])
    print_ordering(data['cells'], args.baseline, args.challenger)

    print(f"\n{'=' * 80}")
    print("REPORT COMPLETE")
    print(f"{'=' * 80}")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
