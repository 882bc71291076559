import numpy as np
from pydantic import BaseModel, model_validator

from src.models.base import Array, ArrayModel


class ModalTargets(ArrayModel):
    controlled: list[int]
    zeta_star: Array
    omega_star: Array

    @model_validator(mode="after")
    def _ranges(self):
        if len(self.zeta_star) != len(self.controlled) or len(self.omega_star) != len(
            self.controlled
        ):
            raise ValueError("Targets need one damping ratio and frequency per controlled mode")
        if np.any(self.zeta_star <= 0) or np.any(self.zeta_star >= 1):
            raise ValueError("Target damping ratios must lie in (0, 1)")
        if np.any(self.omega_star <= 0):
            raise ValueError("Target eigenfrequencies must be positive")
        return self


class FlexGains(ArrayModel):
    """Active stiffness k_s and damping k_d, in decoupled input coordinates."""

    controlled: list[int]
    k_s: Array
    k_d: Array

    @property
    def k_fm(self) -> np.ndarray:
        return np.hstack([self.k_s, self.k_d])

    def command(self, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        return self.k_s @ positions + self.k_d @ velocities


class DiscreteFilter(ArrayModel):
    """Discrete SISO transfer function num(z)/den(z) with its sampling time."""

    num: Array
    den: Array
    ts: float

    def response(self, f_hz: np.ndarray) -> np.ndarray:
        z = np.exp(1j * 2 * np.pi * np.asarray(f_hz, float) * self.ts)
        return np.polyval(self.num, z) / np.polyval(self.den, z)


class BandPass(ArrayModel):
    """Squared second-order band-pass per controlled mode."""

    omega: Array
    q: float
    ts: float
    sections: list[DiscreteFilter]


class PidAxisDesign(ArrayModel):
    f_bw_hz: float
    mass: float
    gain: float
    k_p: float
    k_i: float
    k_d: float
    f_lp_hz: float
    controller: DiscreteFilter
    crossover_gain: float
    phase_margin_deg: float


class FeedforwardDesign(BaseModel):
    mass: float
    enabled: bool = True
    snap_gain: float = 0.0

    def command(self, acceleration: float, snap: float = 0.0) -> float:
        if not self.enabled:
            return 0.0
        return self.mass * acceleration + self.snap_gain * snap


class RigidBodyDesign(BaseModel):
    axes: list[str]
    pid: list[PidAxisDesign]
    feedforward: list[FeedforwardDesign]
    ts: float
