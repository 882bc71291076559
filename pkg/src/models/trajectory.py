from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from src.models.base import Array, ArrayModel


class MotionLimits(BaseModel):
    v_max: float = Field(gt=0)
    a_max: float = Field(gt=0)
    j_max: float = Field(gt=0)
    s_max: float = Field(gt=0)


class ScanLine(BaseModel):
    """One exposure: a constant-velocity pass from start to end (m)."""

    start: tuple[float, float]
    end: tuple[float, float]
    die: Optional[str] = None


class ScanWindow(BaseModel):
    """Sample index ranges [start, stop) of one die's constant-velocity and exposure intervals."""

    die: str
    axis: str
    cv_start: int
    cv_stop: int
    exposure_start: int
    exposure_stop: int

    def contains(self, other_start: int, other_stop: int) -> bool:
        return self.cv_start <= other_start and other_stop <= self.cv_stop


class ReferenceTrace(ArrayModel):
    """Sampled 4th-order reference; derivative arrays have shape (n_samples, n_axes)."""

    axes: list[str]
    ts: float
    position: Array
    velocity: Array
    acceleration: Array
    jerk: Array
    snap: Array
    segments: list[int] = []
    windows: list[ScanWindow] = []

    @property
    def n_samples(self) -> int:
        return self.position.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.ts

    @property
    def duration(self) -> float:
        return max(self.n_samples - 1, 0) * self.ts

    def axis(self, name: str) -> int:
        return self.axes.index(name)

    def window_mask(self, exposure: bool = True) -> np.ndarray:
        mask = np.zeros(self.n_samples, dtype=bool)
        for window in self.windows:
            if exposure:
                mask[window.exposure_start : window.exposure_stop] = True
            else:
                mask[window.cv_start : window.cv_stop] = True
        return mask
