"""
Error Types
===========

Exception hierarchy shared by every subpackage. Precondition violations are
``ValueError`` subclasses and numeric failures are ``RuntimeError``
subclasses, so callers that only know the builtins still catch them.
"""

from typing import Optional, Sequence


class RiskAggError(Exception):
    """Base class for all riskagg errors"""


class DomainError(RiskAggError, ValueError):
    """An argument lies outside the domain of the operation"""


class ConfigError(RiskAggError, ValueError):
    """Invalid experiment configuration"""


class NumericError(RiskAggError, RuntimeError):
    """A numeric routine failed to produce a trustworthy result"""


class ProjectionError(NumericError):
    """Cone projection (NNLS) did not converge"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class ConvergenceError(NumericError):
    """Iterative solver stopped before reaching its tolerance"""

    def __init__(self, message: str, gap_estimate: float):
        super().__init__(f"{message} (gap estimate={gap_estimate:.3e})")
        self.gap_estimate = gap_estimate


class DrawCapExceededError(NumericError):
    """Aggregation sampling consumed its draw budget"""

    def __init__(self, draws: int, n_risk: int, n_risk_target: int):
        super().__init__(
            f"draw cap of {draws} reached with {n_risk}/{n_risk_target} risk "
            f"scenarios; the aggregation region probability is probably ~1"
        )
        self.draws = draws
        self.n_risk = n_risk
        self.n_risk_target = n_risk_target


class EmptyAggregationRegionError(RiskAggError):
    """No draw or scenario mass falls in the aggregation region"""


class InfeasibleProblemError(RiskAggError):
    """The optimization problem (or a candidate solution) is infeasible"""

    def __init__(self, message: str, t: Optional[float] = None,
                 mu: Optional[Sequence[float]] = None):
        details = []
        if t is not None:
            details.append(f"t={t}")
        if mu is not None:
            details.append("mu=[" + ", ".join(f"{m:.6g}" for m in mu) + "]")
        super().__init__(message + (f" ({', '.join(details)})" if details else ""))
        self.t = t
        self.mu = None if mu is None else list(mu)
