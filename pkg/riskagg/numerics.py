"""
Numeric Helpers
===============

Shared tolerances and small linear-algebra checks.
"""

import numpy as np

from .errors import DomainError

# Non-singularity threshold relative to the largest singular value
EPS_DET = 1e-12

# Probabilities must sum to one within this tolerance
PROB_SUM_TOL = 1e-12

# Slack used when comparing cumulative probabilities against beta
CDF_TOL = 1e-12


def check_probability(beta: float, name: str = "beta") -> float:
    """Return beta as float, raising DomainError unless 0 < beta < 1"""
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {beta}")
    return beta


def as_matrix(a, name: str) -> np.ndarray:
    """Square float matrix copy"""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains NaN or Inf")
    return m


def as_vector(v, dim: int, name: str) -> np.ndarray:
    out = np.array(v, dtype=float).reshape(-1)
    if out.shape[0] != dim:
        raise DomainError(f"{name} must have length {dim}, got {out.shape[0]}")
    return out


def assert_nonsingular(P: np.ndarray, name: str = "P") -> None:
    """Raise DomainError when P is numerically singular"""
    s = np.linalg.svd(P, compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] <= EPS_DET * s[0]:
        raise DomainError(f"{name} is singular (condition threshold {EPS_DET:g})")


def spd_factor(sigma: np.ndarray, name: str = "Sigma") -> np.ndarray:
    """
    Upper factor P with sigma = P^T P.

    Raises DomainError when sigma is not symmetric positive definite.
    """
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-14):
        raise DomainError(f"{name} is not symmetric")
    try:
        lower = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise DomainError(f"{name} is not positive definite: {e}") from e
    return lower.T.copy()


def whiten(P: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Rows w with P^T w = delta for every row delta"""
    return np.linalg.solve(P.T, np.atleast_2d(deltas).T).T


def freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a
