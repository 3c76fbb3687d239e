"""
Tail Risk
=========

VaR / CVaR of discrete loss distributions and CVaR portfolio problems.
"""

from .measures import CVaRNormalization, LossSample, cvar_discrete, ru_inner_minimum, var_discrete
from .portfolio import (
    DEFAULT_TARGET_RETURN,
    CVaRSolution,
    ExactSolution,
    PortfolioProblem,
    cvar_normal_analytic,
    optimality_gap,
    portfolio_losses,
    solve_cvar_portfolio,
    solve_exact_normal,
)

__all__ = [
    'CVaRNormalization', 'LossSample', 'cvar_discrete', 'ru_inner_minimum', 'var_discrete',
    'DEFAULT_TARGET_RETURN', 'CVaRSolution', 'ExactSolution', 'PortfolioProblem',
    'cvar_normal_analytic', 'optimality_gap', 'portfolio_losses', 'solve_cvar_portfolio',
    'solve_exact_normal',
]
