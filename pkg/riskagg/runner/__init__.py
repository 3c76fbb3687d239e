"""
Experiment Runner
=================

Experiment configuration and the runner behind the riskagg CLI.
"""

from .config import ExperimentConfig, ExperimentKind, MethodKind, PRESETS, load_config, preset
from .experiment_runner import (
    ExperimentResult,
    ExperimentRunner,
    MethodSizeStats,
    ReplicationOutcome,
    StabilityReport,
    build_region,
    load_returns,
    run_effsize_check,
    run_generate,
    run_prob_curves,
    run_stability,
    synthetic_market,
)

__all__ = [
    'ExperimentConfig', 'ExperimentKind', 'MethodKind', 'PRESETS', 'load_config', 'preset',
    'ExperimentResult', 'ExperimentRunner', 'MethodSizeStats', 'ReplicationOutcome',
    'StabilityReport', 'build_region', 'load_returns', 'run_effsize_check', 'run_generate',
    'run_prob_curves', 'run_stability', 'synthetic_market',
]
