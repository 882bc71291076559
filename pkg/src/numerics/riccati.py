"""Stationary predictor gains from the filter-form discrete algebraic Riccati equation.

    P = A P A' - A P C' (C P C' + R)^-1 C P A' + Q,     L = A P C' (C P C' + R)^-1
"""

import logging
from typing import Optional

import numpy as np
from scipy import linalg

from src.errors import IllConditionedError, NotDetectableError

logger = logging.getLogger(__name__)


def riccati_residual(
    a: np.ndarray, c: np.ndarray, q: np.ndarray, r: np.ndarray, p: np.ndarray
) -> float:
    """Frobenius norm of the filter-form DARE residual."""
    s = c @ p @ c.T + r
    correction = a @ p @ c.T @ np.linalg.solve(s, c @ p @ a.T)
    return float(np.linalg.norm(a @ p @ a.T - correction + q - p, "fro"))


def predictor_gain(a: np.ndarray, c: np.ndarray, r: np.ndarray, p: np.ndarray) -> np.ndarray:
    s = c @ p @ c.T + r
    return np.linalg.solve(s.T, (a @ p @ c.T).T).T


def _doubling(
    a: np.ndarray, c: np.ndarray, q: np.ndarray, r: np.ndarray, tol: float, max_iter: int
) -> Optional[np.ndarray]:
    """Structure-preserving doubling on the dual (control-form) equation."""
    n = a.shape[0]
    a_k = a.T.copy()
    g_k = c.T @ np.linalg.solve(r, c)
    h_k = q.copy()
    identity = np.eye(n)
    for iteration in range(max_iter):
        w = identity + g_k @ h_k
        w_a = np.linalg.solve(w, a_k)
        w_g = np.linalg.solve(w, g_k)
        h_next = h_k + a_k.T @ h_k @ w_a
        g_k = g_k + a_k @ w_g @ a_k.T
        a_k = a_k @ w_a
        if not np.all(np.isfinite(h_next)):
            return None
        increment = np.linalg.norm(h_next - h_k, "fro")
        h_k = h_next
        if increment <= tol * max(1.0, np.linalg.norm(h_k, "fro")):
            logger.debug("Doubling converged after %d iterations", iteration + 1)
            return 0.5 * (h_k + h_k.T)
    return None


def _newton_refine(
    a: np.ndarray, c: np.ndarray, q: np.ndarray, r: np.ndarray, p: np.ndarray, steps: int = 2
) -> np.ndarray:
    best, best_residual = p, riccati_residual(a, c, q, r, p)
    for _ in range(steps):
        gain = predictor_gain(a, c, r, best)
        closed = a - gain @ c
        if np.max(np.abs(np.linalg.eigvals(closed))) >= 1.0:
            break
        candidate = linalg.solve_discrete_lyapunov(closed, q + gain @ r @ gain.T)
        candidate = 0.5 * (candidate + candidate.T)
        residual = riccati_residual(a, c, q, r, candidate)
        if not residual < best_residual:
            break
        best, best_residual = candidate, residual
    return best


def solve_dare(
    a: np.ndarray,
    c: np.ndarray,
    q: np.ndarray,
    r: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 200,
    cond_limit: float = 1e12,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Solve the filter-form DARE and return the stabilizing solution and predictor gain.

    Q and R are scaled by ||R|| before solving; P is scaled back afterwards.

    Args:
        a (np.ndarray): Discrete system matrix.
        c (np.ndarray): Output matrix.
        q (np.ndarray): Process noise covariance (PSD).
        r (np.ndarray): Measurement noise covariance (SPD).
        tol (float): Doubling convergence threshold on the relative P increment.
        max_iter (int): Doubling iteration cap.
        cond_limit (float): Largest accepted condition number of C P C' + R.

    Returns:
        tuple[np.ndarray, np.ndarray]: P and L.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    if np.min(np.linalg.eigvalsh(0.5 * (r + r.T))) <= 0:
        raise IllConditionedError("Measurement noise covariance must be positive definite")

    scale = np.linalg.norm(r, 2)
    q_n, r_n = q / scale, r / scale

    p_n = _doubling(a, c, q_n, r_n, tol, max_iter)
    if p_n is None:
        logger.debug("Doubling did not converge; falling back to the Schur solver")
        try:
            p_n = linalg.solve_discrete_are(a.T, c.T, q_n, r_n)
        except (ValueError, np.linalg.LinAlgError) as e:
            raise NotDetectableError(f"No stabilizing Riccati solution: {e}")
    p_n = _newton_refine(a, c, q_n, r_n, p_n)

    innovation = c @ p_n @ c.T + r_n
    if np.linalg.cond(innovation) > cond_limit:
        raise IllConditionedError(
            f"Innovation covariance has condition number {np.linalg.cond(innovation):.3g}"
        )
    gain = predictor_gain(a, c, r_n, p_n)
    radius = float(np.max(np.abs(np.linalg.eigvals(a - gain @ c)))) if a.size else 0.0
    if not radius < 1.0:
        raise NotDetectableError(f"Predictor is not stable (spectral radius {radius:.6g})")

    residual = riccati_residual(a, c, q_n, r_n, p_n)
    if residual > 1e-8 * (1.0 + np.linalg.norm(p_n, "fro")):
        raise IllConditionedError(f"Riccati residual {residual:.3g} exceeds tolerance")
    return scale * p_n, gain


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))
