"""
Special Functions
=================

Standard Normal, chi-squared and radial-family quantiles.
"""

import math

import numpy as np
from scipy import special, stats

from ..errors import DomainError
from ..numerics import check_probability


def std_normal_cdf(z):
    """Phi(z), vectorized"""
    return special.ndtr(z)


def std_normal_pdf(z):
    """phi(z), vectorized"""
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def std_normal_quantile(beta: float) -> float:
    """Phi^{-1}(beta) for 0 < beta < 1"""
    beta = check_probability(beta)
    return float(special.ndtri(beta))


def chi2_cdf(x: float, d: int) -> float:
    """P(chi^2_d <= x) via the regularized lower incomplete gamma function"""
    if int(d) != d or d < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {d}")
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError(f"chi-squared argument must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    return float(special.gammainc(0.5 * d, 0.5 * x))


def student_t_quantile(beta: float, dof: float) -> float:
    beta = check_probability(beta)
    if not dof > 0:
        raise DomainError(f"Student-t degrees of freedom must be positive, got {dof}")
    return float(stats.t.ppf(beta, dof))
