"""
Risk Region Aggregation
=======================

Problem-driven scenario generation for stochastic programs with tail risk
measures:
- risk regions: membership tests for conservative (monotonic loss) and
  exact (elliptical portfolio) regions, plus a discrete brute-force oracle
- aggregation sampling / aggregation reduction
- VaR and CVaR evaluation and CVaR portfolio optimization
- desk-scale experiment harness (probability curves, effective sample size,
  stability study)
"""

__version__ = "1.0.0"
