from typing import Optional

import numpy as np
from pydantic import BaseModel

from src.models.base import Array, ArrayModel
from src.models.plant import SchedulingPoint
from src.models.trajectory import ScanWindow


class SimTrace(ArrayModel):
    """Per-tick record of one closed-loop run; 2-D arrays are (n_samples, channels)."""

    label: str
    flex_enabled: bool
    ts: float
    axes: list[str]
    p: Array
    reference: Array
    y: Array
    e: Array
    u_rb: Array
    u_ff: Array
    u_fm: Array
    u_tilde: Array
    modal: Array
    q_hat: Array
    sensor_noise: Array
    force_noise: Array
    local: Optional[Array] = None
    windows: list[ScanWindow] = []

    @property
    def n_samples(self) -> int:
        return self.p.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.ts


class FrfData(ArrayModel):
    freq_hz: Array
    response: Array
    point: SchedulingPoint
    flex_enabled: bool

    def channel(self, output_index: int, input_index: int) -> np.ndarray:
        return self.response[:, output_index, input_index]


class MetricRecord(BaseModel):
    die: str
    axis: str
    ma_peak: float
    msd_peak: float


class ExposureMetrics(ArrayModel):
    label: str
    window_s: float
    records: list[MetricRecord]
    ma: Array
    msd: Array

    def peak_msd(self, axis: str) -> float:
        values = [r.msd_peak for r in self.records if r.axis == axis]
        return max(values) if values else 0.0


class CpsCurve(ArrayModel):
    label: str
    axis: str
    freq_hz: Array
    psd: Array
    cumulative: Array

    def band_step(self, band: tuple[float, float]) -> float:
        """Increase of the cumulative curve across a frequency band."""
        lo = np.interp(band[0], self.freq_hz, self.cumulative)
        hi = np.interp(band[1], self.freq_hz, self.cumulative)
        return float(hi - lo)
