"""
Scenario Generation
===================

Aggregation sampling, aggregation reduction and the discrete aggregated
random vector transform.
"""

from .aggregation import (
    DEFAULT_DRAW_CAP,
    AggSamplingReport,
    NonRiskRepresentation,
    RunningMean,
    aggregate_discrete,
    aggregation_reduction,
    aggregation_sampling,
    effective_size_stats,
    effective_size_variance,
)

__all__ = [
    'DEFAULT_DRAW_CAP', 'AggSamplingReport', 'NonRiskRepresentation', 'RunningMean',
    'aggregate_discrete', 'aggregation_reduction', 'aggregation_sampling',
    'effective_size_stats', 'effective_size_variance',
]
