"""Equality-constrained linear least squares, including inconsistent constraint sets.

Solves min ||U F - E|| over the minimizers of ||X F - J||: the constraints are met exactly
when they are consistent and in the least-squares sense otherwise.
"""

from typing import NamedTuple

import numpy as np
from scipy import linalg

from src.errors import DegenerateRegressorError


class LseSolution(NamedTuple):
    f: np.ndarray
    constraint_residual: float
    fit_residual: float
    constraint_rank: int
    degenerate: bool


def solve_constrained_lstsq(
    u: np.ndarray, e: np.ndarray, x: np.ndarray, j: np.ndarray, rcond: float = 1e-12
) -> LseSolution:
    """
    Two-stage orthogonal-decomposition solve.

    The constraint stage takes the minimum-norm least-squares solution F0 of X F = J; the
    remaining freedom F0 + N z, with N an orthonormal null-space basis of X, is spent on the
    regression.

    Args:
        u (np.ndarray): Regressor matrix.
        e (np.ndarray): Regression target.
        x (np.ndarray): Constraint matrix.
        j (np.ndarray): Constraint right-hand side.
        rcond (float): Relative singular-value cutoff for ranks and pseudoinverses.

    Returns:
        LseSolution: Coefficients, residuals, constraint rank and a degeneracy flag.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    e = np.asarray(e, dtype=float).reshape(-1)
    j = np.asarray(j, dtype=float).reshape(-1)
    if not np.any(u):
        raise DegenerateRegressorError("Regressor matrix is identically zero")

    f0 = linalg.pinv(x, rtol=rcond) @ j
    null = linalg.null_space(x, rcond=rcond)
    rank = x.shape[1] - null.shape[1]

    degenerate = False
    if null.shape[1]:
        reduced = u @ null
        z, _, reduced_rank, _ = linalg.lstsq(reduced, e - u @ f0, cond=rcond)
        degenerate = reduced_rank < reduced.shape[1]
        f = f0 + null @ z
    else:
        f = f0

    return LseSolution(
        f=f,
        constraint_residual=float(np.linalg.norm(x @ f - j)),
        fit_residual=float(np.linalg.norm(u @ f - e)),
        constraint_rank=int(rank),
        degenerate=bool(degenerate),
    )
