"""Time- and frequency-domain error metrics."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal
from scipy.integrate import cumulative_trapezoid

from src.errors import ConfigError, EmptyBandError, TooShortError, WindowTooLongError


def window_samples(window_s: float, ts: float) -> int:
    """Samples in a window of length T; T must be a positive whole multiple of Ts."""
    if window_s <= 0 or ts <= 0:
        raise ConfigError(f"Window length and Ts must be positive, got T={window_s}, Ts={ts}")
    periods = window_s / ts
    if abs(periods - round(periods)) > 1e-9 * max(1.0, periods):
        raise ConfigError(f"Window length T={window_s} s is not a whole multiple of Ts={ts} s")
    return int(round(periods)) + 1


def trapezoid_weights(n: int) -> np.ndarray:
    weights = np.ones(n)
    weights[[0, -1]] = 0.5
    return weights / weights.sum()


def ma_msd(e: np.ndarray, ts: float, window_s: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Centered moving average and moving standard deviation with trapezoidal weights.

    Samples whose window does not fit inside the record are NaN.

    Args:
        e (np.ndarray): Error signal, shape (N,) or (N, channels).
        ts (float): Sampling time (s).
        window_s (float): Window length T (s).

    Returns:
        tuple[np.ndarray, np.ndarray]: MA and MSD with the shape of e.
    """
    e = np.asarray(e, dtype=float)
    squeeze = e.ndim == 1
    e2 = e[:, None] if squeeze else e
    n = window_samples(window_s, ts)
    if n > e2.shape[0]:
        raise WindowTooLongError(f"Window of {n} samples exceeds the {e2.shape[0]}-sample record")

    weights = trapezoid_weights(n)
    half = (n - 1) // 2
    ma = np.full(e2.shape, np.nan)
    msd = np.full(e2.shape, np.nan)
    for channel in range(e2.shape[1]):
        windows = sliding_window_view(e2[:, channel], n)
        mean = windows @ weights
        variance = ((windows - mean[:, None]) ** 2) @ weights
        ma[half : half + len(mean), channel] = mean
        msd[half : half + len(mean), channel] = np.sqrt(np.maximum(variance, 0.0))
    if squeeze:
        return ma[:, 0], msd[:, 0]
    return ma, msd


def cumulative_psd(
    x: np.ndarray, ts: float, segment: int = 2048
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Welch PSD (Hann, 50% overlap) and its running integral over frequency.

    Returns:
        tuple: Frequencies (Hz), one-sided PSD and the cumulative power.
    """
    x = np.asarray(x, dtype=float)
    if x.size < segment:
        raise TooShortError(f"Segment of {x.size} samples is shorter than {segment}")
    freq, psd = signal.welch(
        x, fs=1.0 / ts, window="hann", nperseg=segment, noverlap=segment // 2
    )
    return freq, psd, cumulative_trapezoid(psd, freq, initial=0.0)


def suppression_db(
    freq_hz: np.ndarray, response_off: np.ndarray, response_on: np.ndarray, band: tuple
) -> float:
    """Peak ratio, in dB, of two responses on a shared grid over a frequency band."""
    freq_hz = np.asarray(freq_hz, dtype=float)
    mask = (freq_hz >= band[0]) & (freq_hz <= band[1])
    if not np.any(mask):
        raise EmptyBandError(f"No frequency points inside {band} Hz")
    peak_off = np.max(np.abs(np.asarray(response_off)[mask]))
    peak_on = np.max(np.abs(np.asarray(response_on)[mask]))
    return float(20 * np.log10(peak_off / peak_on))
