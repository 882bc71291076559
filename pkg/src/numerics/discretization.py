"""Zero-order-hold discretization of continuous state-space models."""

import logging

import numpy as np
from scipy.linalg import expm

from src.errors import NonFiniteError

logger = logging.getLogger(__name__)

# expm of the augmented matrix overflows long before this in double precision
MAX_SCALED_NORM = 700.0


def zoh_discretize(a: np.ndarray, b: np.ndarray, ts: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact ZOH equivalent of x' = A x + B u with u held over each sample.

    The input map is the upper-right block of expm([[A, B], [0, 0]] ts), which is exact
    also for singular A.

    Args:
        a (np.ndarray): Continuous system matrix (n x n).
        b (np.ndarray): Continuous input matrix (n x m).
        ts (float): Sampling time (s).

    Returns:
        tuple[np.ndarray, np.ndarray]: Discrete system and input matrices.
    """
    if ts <= 0:
        raise ValueError(f"Sampling time must be positive, got {ts}")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    states, inputs = b.shape

    scaled_norm = ts * np.linalg.norm(a, 1)
    if scaled_norm > MAX_SCALED_NORM:
        raise NonFiniteError(
            f"Ts * ||A||_1 = {scaled_norm:.3g} exceeds {MAX_SCALED_NORM}; the ZOH map overflows"
        )

    augmented = np.zeros((states + inputs, states + inputs))
    augmented[:states, :states] = a
    augmented[:states, states:] = b
    phi = expm(augmented * ts)
    if not np.all(np.isfinite(phi)):
        raise NonFiniteError("Matrix exponential of the ZOH augmentation is not finite")

    logger.debug("Discretized %d-state model at Ts=%g", states, ts)
    return phi[:states, :states], phi[:states, states:]
