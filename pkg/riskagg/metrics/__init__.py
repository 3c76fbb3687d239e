"""
Stability Metrics
=================

Summary statistics for replicated scenario-generation experiments.
"""

from .stability_metrics import Z_95, StabilityMetrics

__all__ = ['Z_95', 'StabilityMetrics']
