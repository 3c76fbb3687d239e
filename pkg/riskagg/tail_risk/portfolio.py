"""
CVaR Portfolio Problems
=======================

Problem (P): minimize the beta-CVaR of the portfolio loss -x^T Y over
x >= 0 subject to E[x^T Y] >= t and, by default, the budget sum(x) = 1.

Scenario instances are solved as the Rockafellar-Uryasev linear program.
Normal instances are solved exactly through the closed form

    CVaR(-x^T Y) = -(1 - beta) mu^T x + sqrt(x^T Sigma x) phi(Phi^{-1}(beta))

in the unnormalized convention (STANDARD divides by 1 - beta).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize

from ..distributions import EllipticalDist, std_normal_pdf, std_normal_quantile
from ..errors import ConvergenceError, DomainError, InfeasibleProblemError, NumericError
from ..numerics import as_matrix, as_vector, check_probability, freeze, spd_factor
from ..scenario_set import ScenarioSet
from .measures import CVaRNormalization, LossSample

logger = logging.getLogger(__name__)

DEFAULT_TARGET_RETURN = 0.01

# Feasibility slack for candidate portfolios
FEASIBILITY_TOL = 1e-9

# Candidate objective may undercut the exact optimum by this much
GAP_CLAMP_TOL = 1e-8

# Largest accepted Frank-Wolfe duality gap for the exact solver
EXACT_GAP_TOL = 1e-6

_LP_OPTIONS = {'primal_feasibility_tolerance': 1e-10, 'dual_feasibility_tolerance': 1e-10}


def _normalize_target(t: Optional[float]) -> Optional[float]:
    if t is None or t == -np.inf:
        return None
    t = float(t)
    if not np.isfinite(t):
        raise DomainError(f"target return must be finite, None or -inf, got {t}")
    return t


@dataclass(frozen=True, eq=False)
class PortfolioProblem:
    """Problem (P) for Y ~ N(mu, sigma)"""
    mu: np.ndarray
    sigma: np.ndarray
    beta: float
    t: Optional[float] = DEFAULT_TARGET_RETURN
    budget: bool = True

    def __post_init__(self):
        sigma = as_matrix(self.sigma, "Sigma")
        mu = as_vector(self.mu, sigma.shape[0], "mu")
        object.__setattr__(self, 'factor', freeze(spd_factor(sigma)))
        object.__setattr__(self, 'sigma', freeze(sigma))
        object.__setattr__(self, 'mu', freeze(mu))
        object.__setattr__(self, 'beta', check_probability(self.beta))
        object.__setattr__(self, 't', _normalize_target(self.t))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def is_feasible(self) -> bool:
        if self.t is None:
            return True
        if self.budget:
            return float(self.mu.max()) >= self.t - FEASIBILITY_TOL
        return self.t <= 0.0 or float(self.mu.max()) > 0.0

    def dist(self) -> EllipticalDist:
        return EllipticalDist(self.factor, self.mu)

    def check_feasible(self) -> None:
        if not self.is_feasible:
            raise InfeasibleProblemError("no portfolio reaches the target return", self.t, self.mu)

    def violations(self, x) -> dict:
        """Constraint violations of x (zero when satisfied)"""
        x = np.asarray(x, dtype=float)
        return {
            'nonnegativity': float(max(0.0, -x.min())),
            'budget': float(abs(x.sum() - 1.0)) if self.budget else 0.0,
            'return': float(max(0.0, self.t - self.mu @ x)) if self.t is not None else 0.0,
        }

    def is_feasible_portfolio(self, x, tol: float = FEASIBILITY_TOL) -> bool:
        return all(v <= tol for v in self.violations(x).values())


def portfolio_losses(scens: ScenarioSet, x) -> LossSample:
    """Loss sample of -x^T y over a scenario set"""
    return LossSample(-(scens.points @ np.asarray(x, dtype=float)), scens.probs)


def cvar_normal_analytic(x, prob: PortfolioProblem,
                         normalization: CVaRNormalization = CVaRNormalization.UNNORMALIZED) -> float:
    x = as_vector(x, prob.dim, "x")
    scale = float(np.linalg.norm(prob.factor @ x))
    value = -(1.0 - prob.beta) * float(prob.mu @ x) + scale * float(std_normal_pdf(std_normal_quantile(prob.beta)))
    if CVaRNormalization(normalization) is CVaRNormalization.STANDARD:
        value /= 1.0 - prob.beta
    return value


@dataclass(frozen=True)
class CVaRSolution:
    """Optimizer of the scenario CVaR linear program"""
    x: np.ndarray
    objective: float
    var: float
    normalization: CVaRNormalization


def solve_cvar_portfolio(scens: ScenarioSet, beta: float, t: Optional[float] = DEFAULT_TARGET_RETURN,
                         normalization: CVaRNormalization = CVaRNormalization.UNNORMALIZED,
                         budget: bool = True) -> CVaRSolution:
    """
    Rockafellar-Uryasev LP over variables (x, alpha, u):

        min   (1 - beta) alpha + sum_i p_i u_i
        s.t.  u_i >= -y_i^T x - alpha,  u >= 0,  x >= 0,
              ybar^T x >= t,  sum(x) = 1 (budget)

    STANDARD normalization divides the objective by (1 - beta).
    """
    beta = check_probability(beta)
    t = _normalize_target(t)
    normalization = CVaRNormalization(normalization)
    n, d = scens.n, scens.dim

    mean = scens.mean()
    if t is not None and budget and float(mean.max()) < t - FEASIBILITY_TOL:
        raise InfeasibleProblemError("no portfolio reaches the target return on these scenarios", t, mean)

    cost = np.concatenate([np.zeros(d), [1.0 - beta], scens.probs])
    if normalization is CVaRNormalization.STANDARD:
        cost = cost / (1.0 - beta)

    A_ub = sparse.hstack([
        sparse.csr_matrix(-scens.points),
        sparse.csr_matrix(-np.ones((n, 1))),
        -sparse.identity(n, format='csr'),
    ])
    b_ub = np.zeros(n)
    if t is not None:
        A_ub = sparse.vstack([A_ub, sparse.csr_matrix(np.concatenate([-mean, np.zeros(n + 1)]))])
        b_ub = np.append(b_ub, -t)

    A_eq, b_eq = None, None
    if budget:
        A_eq = sparse.csr_matrix(np.concatenate([np.ones(d), np.zeros(n + 1)]).reshape(1, -1))
        b_eq = np.ones(1)

    bounds = [(0, None)] * d + [(None, None)] + [(0, None)] * n
    res = linprog(cost, A_ub=A_ub.tocsr(), b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method='highs-ds', options=_LP_OPTIONS)

    logger.debug("CVaR LP: n=%d d=%d status=%d %s", n, d, res.status, res.message)
    if res.status == 2:
        raise InfeasibleProblemError("scenario CVaR problem is infeasible", t, mean)
    if res.status != 0:
        raise NumericError(f"CVaR LP failed with status {res.status}: {res.message}")

    x = np.maximum(res.x[:d], 0.0)
    return CVaRSolution(x, float(res.fun), float(res.x[d]), normalization)


@dataclass(frozen=True)
class ExactSolution:
    """Optimizer of problem (P) under the Normal closed form"""
    x_star: np.ndarray
    v_star: float
    certificate_gap: float    # Frank-Wolfe duality gap at x_star
    iterations: int
    return_multiplier: float = 0.0    # Lagrange multiplier of mu^T x >= t


def _starting_point(prob: PortfolioProblem) -> np.ndarray:
    d = prob.dim
    uniform = np.full(d, 1.0 / d)
    best = np.zeros(d)
    best[int(np.argmax(prob.mu))] = 1.0

    if prob.budget:
        if prob.t is None or prob.mu @ uniform >= prob.t:
            return uniform
        spread = prob.mu @ best - prob.mu @ uniform
        if spread <= 0.0:
            return best
        lam = (prob.t - prob.mu @ uniform) / spread
        lam = min(1.0, lam + 0.5 * (1.0 - lam))
        return (1.0 - lam) * uniform + lam * best

    mix = 0.5 * uniform + 0.5 * best
    direction = mix if prob.mu @ mix > 0 else best
    return 1.5 * prob.t * direction / float(prob.mu @ direction)


def _frank_wolfe_gap(prob: PortfolioProblem, x: np.ndarray, grad: np.ndarray) -> Tuple[float, float]:
    """
    max over feasible s of grad^T (x - s), and the dual price of the return
    constraint in that linearized problem. At an optimal x the price is a
    KKT multiplier of (P).
    """
    d = prob.dim
    A_ub, b_ub = [], []
    if prob.t is not None:
        A_ub.append(-prob.mu)
        b_ub.append(-prob.t)
    A_eq, b_eq = None, None
    if prob.budget:
        A_eq, b_eq = np.ones((1, d)), np.ones(1)
    else:
        # local box around x, enough to certify a convex objective
        A_ub.append(np.ones(d))
        b_ub.append(10.0 * max(1.0, float(x.sum())))

    res = linprog(grad, A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * d, method='highs-ds', options=_LP_OPTIONS)
    if res.status != 0:
        raise NumericError(f"Frank-Wolfe certificate LP failed: {res.message}")
    # return row is first; marginals are d(fun)/d(b_ub) with b_ub = -t
    multiplier = max(0.0, -float(res.ineqlin.marginals[0])) if prob.t is not None else 0.0
    return float(grad @ x - res.fun), multiplier


def solve_exact_normal(prob: PortfolioProblem, max_restarts: int = 3) -> ExactSolution:
    """
    Minimize the closed-form CVaR over the feasible set of (P).

    SLSQP with the analytic gradient; the Frank-Wolfe duality gap bounds the
    remaining suboptimality and must fall below EXACT_GAP_TOL.
    """
    prob.check_feasible()
    if not prob.budget and (prob.t is None or prob.t <= 0.0):
        raise DomainError("without the budget constraint the target return must be positive")

    tail = float(std_normal_pdf(std_normal_quantile(prob.beta)))
    weight = 1.0 - prob.beta
    mu, factor = prob.mu, prob.factor

    def objective(x):
        return -weight * (mu @ x) + tail * np.linalg.norm(factor @ x)

    def gradient(x):
        px = factor @ x
        norm = np.linalg.norm(px)
        g = -weight * mu
        if norm > 0.0:
            g = g + tail * (factor.T @ px) / norm
        return g

    constraints = []
    if prob.budget:
        constraints.append({'type': 'eq', 'fun': lambda x: np.sum(x) - 1.0, 'jac': lambda x: np.ones_like(x)})
    if prob.t is not None:
        constraints.append({'type': 'ineq', 'fun': lambda x: mu @ x - prob.t, 'jac': lambda x: mu})

    x = _starting_point(prob)
    iterations = 0
    gap, multiplier = np.inf, 0.0
    for attempt in range(max_restarts):
        result = minimize(objective, x, jac=gradient, method='SLSQP', bounds=[(0, None)] * prob.dim,
                          constraints=constraints, options={'maxiter': 1000, 'ftol': 1e-15})
        iterations += int(result.nit)
        x = np.maximum(result.x, 0.0)
        if prob.budget:
            x = x / x.sum()
        gap, multiplier = _frank_wolfe_gap(prob, x, gradient(x))
        logger.debug("exact solver attempt %d: f=%.12g gap=%.3e (%s)", attempt, objective(x), gap, result.message)
        if gap <= GAP_CLAMP_TOL:
            break

    if gap > EXACT_GAP_TOL:
        raise ConvergenceError(f"exact Normal solver stopped after {iterations} iterations", gap)
    return ExactSolution(x, float(objective(x)), max(gap, 0.0), iterations, multiplier)


def optimality_gap(x_candidate, prob: PortfolioProblem, exact: Optional[ExactSolution] = None,
                   require_feasible: bool = True) -> float:
    """
    cvar_normal_analytic(x_candidate) - v_star, clamped at zero.

    A feasible candidate undercutting v_star by more than GAP_CLAMP_TOL is a
    numeric failure. With ``require_feasible=False`` a candidate that misses
    the return target is scored with the Lagrangian penalty

        cvar(x) - v_star + lambda * (t - mu^T x)

    where lambda is the return multiplier at x_star. Over the budget simplex
    this is nonnegative by duality, and zero only for Lagrangian minimizers.
    """
    x = as_vector(x_candidate, prob.dim, "x")
    feasible = prob.is_feasible_portfolio(x)
    if require_feasible and not feasible:
        raise InfeasibleProblemError(
            f"candidate portfolio violates (P): {prob.violations(x)}", prob.t, prob.mu)

    exact = exact if exact is not None else solve_exact_normal(prob)
    gap = cvar_normal_analytic(x, prob) - exact.v_star
    if feasible:
        if gap < -GAP_CLAMP_TOL:
            raise NumericError(f"candidate beats the exact optimum by {-gap:.3e}")
    else:
        gap += exact.return_multiplier * prob.violations(x)['return']
    return max(gap, 0.0)
