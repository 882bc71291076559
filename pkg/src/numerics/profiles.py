"""Time-optimal symmetric 4th-order (snap-limited) point-to-point profiles.

A move is a sequence of snap phases with durations t_s (snap), t_j (constant jerk),
t_a (constant acceleration) and t_v (constant velocity):

    +s t_s, 0 t_j, -s t_s, 0 t_a, -s t_s, 0 t_j, +s t_s, 0 t_v, and the mirror image.
"""

import logging
from typing import NamedTuple

import numpy as np

from src.errors import InfeasibleLimitsError
from src.models.trajectory import MotionLimits

logger = logging.getLogger(__name__)

# Rounding slack for durations that are whole sample multiples up to float error
_SAMPLE_SLACK = 1e-9


class ProfileDurations(NamedTuple):
    t_s: float
    t_j: float
    t_a: float
    t_v: float

    @property
    def total(self) -> float:
        return 8 * self.t_s + 4 * self.t_j + 2 * self.t_a + self.t_v


class AxisProfile(NamedTuple):
    snap: np.ndarray
    counts: tuple[int, int, int, int]
    snap_level: float
    plateau: tuple[int, int]


def _validate(limits: MotionLimits):
    values = (limits.v_max, limits.a_max, limits.j_max, limits.s_max)
    if not all(np.isfinite(v) and v > 0 for v in values):
        raise InfeasibleLimitsError(f"Motion limits must be finite and positive, got {values}")


def _smallest_root(coefficients: list[float]) -> float:
    roots = np.roots(coefficients)
    real = roots[np.abs(roots.imag) <= 1e-9 * max(1.0, np.abs(roots).max())].real
    candidates = real[real >= -1e-12]
    return float(max(candidates.min(), 0.0)) if candidates.size else 0.0


def continuous_durations(distance: float, limits: MotionLimits) -> ProfileDurations:
    """
    Greedy phase durations of the continuous-time optimal profile.

    Args:
        distance (float): Absolute move length (m).
        limits (MotionLimits): Velocity, acceleration, jerk and snap limits.

    Returns:
        ProfileDurations: t_s, t_j, t_a, t_v (s).
    """
    _validate(limits)
    x = abs(distance)
    if x == 0:
        return ProfileDurations(0.0, 0.0, 0.0, 0.0)
    v, a, j, s = limits.v_max, limits.a_max, limits.j_max, limits.s_max

    t_s = min((x / (8 * s)) ** 0.25, (v / (2 * s)) ** (1 / 3), np.sqrt(a / s), j / s)

    # x = 2 s t_s (t_s + t_j) (2 t_s + t_j)^2 as a cubic in t_j
    cubic = 2 * s * t_s * np.polymul([1.0, t_s], np.polymul([1.0, 2 * t_s], [1.0, 2 * t_s]))
    cubic[-1] -= x
    t_j = min(
        a / (s * t_s) - t_s,
        (-3 * t_s + np.sqrt(t_s**2 + 4 * v / (s * t_s))) / 2,
        _smallest_root(list(cubic)),
    )
    t_j = max(t_j, 0.0)

    a_peak = s * t_s * (t_s + t_j)
    ramp = 2 * t_s + t_j
    t_a = min(v / a_peak - ramp, (-3 * ramp + np.sqrt(ramp**2 + 4 * x / a_peak)) / 2)
    t_a = max(t_a, 0.0)

    v_peak = a_peak * (ramp + t_a)
    t_v = max(x / v_peak - (2 * ramp + t_a), 0.0)
    return ProfileDurations(float(t_s), float(t_j), float(t_a), float(t_v))


def _phases(counts: tuple[int, int, int, int]) -> list[tuple[float, int]]:
    n_s, n_j, n_a, n_v = counts
    half = [(1.0, n_s), (0.0, n_j), (-1.0, n_s), (0.0, n_a), (-1.0, n_s), (0.0, n_j), (1.0, n_s)]
    return half + [(0.0, n_v)] + [(-sign, n) for sign, n in half]


def snap_pattern(counts: tuple[int, int, int, int]) -> np.ndarray:
    """Unit snap held over each sample interval."""
    return np.concatenate([np.full(n, sign) for sign, n in _phases(counts)])


def held_snap_integrate(
    snap: np.ndarray, ts: float, initial: np.ndarray | None = None
) -> np.ndarray:
    """
    Exact samples of position, velocity, acceleration and jerk for snap held per interval.

    Args:
        snap (np.ndarray): Snap on each of the N intervals.
        ts (float): Sampling time (s).
        initial (np.ndarray): Initial (position, velocity, acceleration, jerk).

    Returns:
        np.ndarray: Array of shape (N + 1, 4).
    """
    phi = np.array(
        [
            [1.0, ts, ts**2 / 2, ts**3 / 6],
            [0.0, 1.0, ts, ts**2 / 2],
            [0.0, 0.0, 1.0, ts],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    gamma = np.array([ts**4 / 24, ts**3 / 6, ts**2 / 2, ts])
    out = np.zeros((len(snap) + 1, 4))
    if initial is not None:
        out[0] = initial
    for k, value in enumerate(snap):
        out[k + 1] = phi @ out[k] + gamma * value
    return out


def plan_axis(distance: float, limits: MotionLimits, ts: float) -> AxisProfile:
    """
    Sampled profile with phase durations rounded up to whole samples.

    The snap level is rescaled so the displacement is exact; if rounding pushes a derivative
    over its limit the constant-velocity phase is lengthened until all limits hold.
    """
    _validate(limits)
    if distance == 0:
        return AxisProfile(np.zeros(0), (0, 0, 0, 0), 0.0, (0, 0))
    durations = continuous_durations(distance, limits)
    counts = [int(np.ceil(t / ts - _SAMPLE_SLACK)) for t in durations]
    counts[0] = max(counts[0], 1)
    bounds = np.array([limits.v_max, limits.a_max, limits.j_max, limits.s_max])

    for _ in range(100):
        unit = snap_pattern(tuple(counts))
        states = held_snap_integrate(unit, ts)
        displacement = states[-1, 0]
        level = abs(distance) / displacement
        peaks = level * np.array(
            [np.abs(states[:, 1]).max(), np.abs(states[:, 2]).max(), np.abs(states[:, 3]).max(), 1]
        )
        ratio = float(np.max(peaks / bounds))
        if ratio <= 1.0 - 1e-12:
            break
        v_unit = np.abs(states[:, 1]).max()
        counts[3] += max(1, int(np.ceil((ratio - 1.0 + 1e-9) * displacement / (v_unit * ts))))
    else:
        raise InfeasibleLimitsError(f"Could not satisfy limits for a {distance} m move")

    n_s, n_j, n_a, n_v = counts
    plateau_start = 4 * n_s + 2 * n_j + n_a
    logger.debug("Planned %.6g m move: counts=%s snap=%.6g", distance, counts, level)
    return AxisProfile(
        snap=np.sign(distance) * level * unit,
        counts=tuple(counts),
        snap_level=float(level),
        plateau=(plateau_start, plateau_start + n_v + 1),
    )
