"""
Tail Risk Measures
==================

Value-at-risk and conditional value-at-risk of discrete loss distributions.

CVaR convention: UNNORMALIZED is the integral of the quantile function over
[beta, 1]; STANDARD divides that by (1 - beta).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from ..errors import DomainError
from ..numerics import CDF_TOL, PROB_SUM_TOL, check_probability, freeze


class CVaRNormalization(Enum):
    UNNORMALIZED = "unnormalized"
    STANDARD = "standard"


@dataclass(frozen=True, eq=False)
class LossSample:
    """Discrete loss distribution: losses z_i with probabilities p_i"""
    losses: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        z = np.array(self.losses, dtype=float).reshape(-1)
        p = np.array(self.probs, dtype=float).reshape(-1)
        if z.shape[0] == 0 or z.shape != p.shape:
            raise DomainError(f"{z.shape[0]} losses but {p.shape[0]} probabilities")
        if not np.all(np.isfinite(z)):
            raise DomainError("losses contain NaN or Inf")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"probabilities sum to {p.sum():.17g}, expected 1")
        object.__setattr__(self, 'losses', freeze(z))
        object.__setattr__(self, 'probs', freeze(p))

    @classmethod
    def equiprobable(cls, losses) -> "LossSample":
        z = np.asarray(losses, dtype=float).reshape(-1)
        return cls(z, np.full(z.shape[0], 1.0 / z.shape[0]))

    def sorted(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Ascending losses, their probabilities, and the step CDF at each loss.

        The CDF is formed from the upper tail, F_i = 1 - sum_{j>i} p_j, so the
        last value is exactly 1.
        """
        order = np.argsort(self.losses, kind='stable')
        z, p = self.losses[order], self.probs[order]
        above = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
        return z, p, 1.0 - above

    def mean(self) -> float:
        return float(self.probs @ self.losses)


def _quantile_index(cdf: np.ndarray, beta: float) -> int:
    return int(np.argmax(cdf >= beta - CDF_TOL))


def var_discrete(sample: LossSample, beta: float) -> float:
    """inf{z : F(z) >= beta}"""
    beta = check_probability(beta)
    z, _, cdf = sample.sorted()
    return float(z[_quantile_index(cdf, beta)])


def cvar_discrete(sample: LossSample, beta: float,
                  normalization: CVaRNormalization = CVaRNormalization.UNNORMALIZED) -> float:
    """Exact step integral of the quantile function over [beta, 1]"""
    beta = check_probability(beta)
    z, p, cdf = sample.sorted()
    k = _quantile_index(cdf, beta)
    value = float(p[k + 1:] @ z[k + 1:] + max(cdf[k] - beta, 0.0) * z[k])
    if CVaRNormalization(normalization) is CVaRNormalization.STANDARD:
        value /= 1.0 - beta
    return value


def ru_inner_minimum(sample: LossSample, beta: float) -> float:
    """
    min over alpha of (1 - beta) alpha + sum_i p_i (z_i - alpha)_+.

    The objective is piecewise linear with kinks at the losses, so it is
    evaluated at every kink using suffix sums.
    """
    beta = check_probability(beta)
    z, p, _ = sample.sorted()
    mass_above = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
    pz = p * z
    weighted_above = np.concatenate([np.cumsum(pz[::-1])[::-1][1:], [0.0]])
    objective = (1.0 - beta) * z + weighted_above - mass_above * z
    return float(objective.min())
