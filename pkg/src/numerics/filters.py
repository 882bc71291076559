"""Continuous filter templates and their bilinear discretization."""

import numpy as np
from scipy import signal

from src.errors import AboveNyquistError


def check_below_nyquist(omega: float, ts: float, what: str):
    if omega * ts >= np.pi:
        raise AboveNyquistError(
            f"{what} at {omega / (2 * np.pi):.6g} Hz is not below Nyquist ({0.5 / ts:.6g} Hz)"
        )


def bilinear(
    num: np.ndarray, den: np.ndarray, ts: float, prewarp: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    Tustin map of a continuous transfer function, optionally exact at one frequency.

    Args:
        num (np.ndarray): Continuous numerator, descending powers of s.
        den (np.ndarray): Continuous denominator, descending powers of s.
        ts (float): Sampling time (s).
        prewarp (float): Frequency (rad/s) at which the discrete response matches exactly.

    Returns:
        tuple[np.ndarray, np.ndarray]: Discrete numerator and denominator in z.
    """
    fs = 1.0 / ts
    if prewarp > 0:
        check_below_nyquist(prewarp, ts, "Prewarp frequency")
        fs = prewarp / (2.0 * np.tan(prewarp * ts / 2.0))
    num_d, den_d = signal.bilinear(num, den, fs=fs)
    return np.atleast_1d(num_d), np.atleast_1d(den_d)


def bandpass_section(omega: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """(omega/q) s / (s^2 + (omega/q) s + omega^2): unit gain at omega, zero at DC."""
    return np.array([omega / q, 0.0]), np.array([1.0, omega / q, omega**2])


def squared_bandpass(omega: float, q: float, ts: float) -> tuple[np.ndarray, np.ndarray]:
    """Two identical prewarped band-pass biquads in cascade."""
    check_below_nyquist(omega, ts, "Band-pass center")
    num, den = bilinear(*bandpass_section(omega, q), ts, prewarp=omega)
    return np.convolve(num, num), np.convolve(den, den)


def lead_lag_pid(f_bw_hz: float) -> tuple[np.ndarray, np.ndarray, dict]:
    """
    Unit-gain mass-line controller shape around the bandwidth f_bw.

    Integrator corner at f_bw/5, lead zero at f_bw/3, lead pole at 3 f_bw, first-order
    low-pass at 6 f_bw.

    Returns:
        tuple: Continuous numerator, denominator and the corner frequencies (rad/s).
    """
    w_bw = 2 * np.pi * f_bw_hz
    corners = {"w_i": w_bw / 5, "w_z": w_bw / 3, "w_p": 3 * w_bw, "w_lp": 6 * w_bw}
    integrator = (np.array([1.0, corners["w_i"]]), np.array([1.0, 0.0]))
    lead = (np.array([1.0 / corners["w_z"], 1.0]), np.array([1.0 / corners["w_p"], 1.0]))
    low_pass = (np.array([1.0]), np.array([1.0 / corners["w_lp"], 1.0]))
    num, den = np.array([1.0]), np.array([1.0])
    for n, d in (integrator, lead, low_pass):
        num, den = np.polymul(num, n), np.polymul(den, d)
    return num, den, corners


def discrete_response(num: np.ndarray, den: np.ndarray, ts: float, f_hz) -> np.ndarray:
    z = np.exp(1j * 2 * np.pi * np.asarray(f_hz, dtype=float) * ts)
    return np.polyval(num, z) / np.polyval(den, z)


def is_stable(den: np.ndarray, margin: float = 0.0) -> bool:
    roots = np.roots(den)
    return bool(roots.size == 0 or np.max(np.abs(roots)) < 1.0 - margin)
