"""
Stability Metrics
=================

Summary statistics for replicated experiments: optimality-gap summaries with
95% error bars, aggregation-region probability estimates and moment checks
for the effective sample size.
"""

import math
from typing import Dict, Sequence

import numpy as np

# Two-sided 95% normal quantile used for error bars
Z_95 = 1.96


class StabilityMetrics:
    """Calculate summary metrics from replication outcomes"""

    @staticmethod
    def calculate_gap_summary(gaps: Sequence[float]) -> Dict[str, float]:
        """
        Mean gap with standard error SD / sqrt(reps) and a 95% error bar.

        Args:
            gaps: Optimality gaps of the replications

        Returns:
            Dict with mean, sd, std_error, ci95 (half width), min and max
        """
        gaps = np.asarray(gaps, dtype=float)
        if gaps.size == 0:
            return {}

        sd = float(np.std(gaps, ddof=1)) if gaps.size > 1 else 0.0
        se = sd / math.sqrt(gaps.size)
        return {
            'mean': float(np.mean(gaps)),
            'sd': sd,
            'std_error': se,
            'ci95': Z_95 * se,
            'min': float(np.min(gaps)),
            'max': float(np.max(gaps)),
        }

    @staticmethod
    def calculate_q_estimate(aggregated: int, draws: int) -> Dict[str, float]:
        """Pooled aggregation-region probability with its binomial standard error"""
        if draws <= 0:
            return {'q': 0.0, 'std_error': 0.0, 'draws': 0}
        q = aggregated / draws
        return {'q': q, 'std_error': math.sqrt(q * (1.0 - q) / draws), 'draws': int(draws)}

    @staticmethod
    def variance_standard_error(samples: Sequence[float]) -> float:
        """Standard error of the sample variance from the fourth central moment"""
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n < 4:
            return float('nan')
        centered = x - x.mean()
        m4 = float(np.mean(centered ** 4))
        var = float(np.var(x, ddof=1))
        return math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)

    @staticmethod
    def z_score(estimate: float, expected: float, std_error: float) -> float:
        """(estimate - expected) / std_error; 0 for an exact match with zero error"""
        diff = estimate - expected
        if std_error > 0.0:
            return diff / std_error
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)

    @staticmethod
    def count_inversions(values: Sequence[float]) -> int:
        """Adjacent increases in a sequence expected to decrease"""
        return int(sum(1 for a, b in zip(values, values[1:]) if b > a))
