"""
Distributions
=============

Probability primitives: Normal / chi-squared special functions, elliptical
distributions, reproducible sample streams and survivor estimation.
"""

from .special import chi2_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile, student_t_quantile
from .elliptical import (
    DEFAULT_SURVIVOR_SAMPLES,
    DEFAULT_SURVIVOR_SEED,
    EllipticalDist,
    RadialFamily,
    SampleStream,
    SurvivorEstimator,
    cond_expect_outside,
    derive_seed,
    sample,
    survivor_estimate,
)
from .discrete import DiscreteDist

__all__ = [
    'chi2_cdf', 'std_normal_cdf', 'std_normal_pdf', 'std_normal_quantile', 'student_t_quantile',
    'DEFAULT_SURVIVOR_SAMPLES', 'DEFAULT_SURVIVOR_SEED', 'EllipticalDist', 'RadialFamily',
    'SampleStream', 'SurvivorEstimator', 'cond_expect_outside', 'derive_seed', 'sample',
    'survivor_estimate', 'DiscreteDist',
]
