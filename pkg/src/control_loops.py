"""Stateful runtime controllers stepped once per tick by the simulator."""

from typing import Optional

import numpy as np
from scipy import signal
from scipy.linalg import block_diag

from src.models import BandPass, DiscreteFilter, FlexGains, RigidBodyDesign


class DiscreteStateSpace:
    """x(k+1) = A x(k) + B u(k), y(k) = C x(k) + D u(k)."""

    def __init__(self, a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray):
        self.a = np.atleast_2d(np.asarray(a, dtype=float))
        self.b = np.atleast_2d(np.asarray(b, dtype=float))
        self.c = np.atleast_2d(np.asarray(c, dtype=float))
        self.d = np.atleast_2d(np.asarray(d, dtype=float))
        self.state = np.zeros(self.a.shape[0])

    @classmethod
    def from_filter(cls, filt: DiscreteFilter) -> "DiscreteStateSpace":
        a, b, c, d = signal.tf2ss(filt.num, filt.den)
        return cls(a, b, c, d)

    @classmethod
    def diagonal(cls, filters: list[DiscreteFilter]) -> "DiscreteStateSpace":
        """Independent SISO filters stacked into one MIMO realization."""
        parts = [cls.from_filter(f) for f in filters]
        return cls(
            block_diag(*[p.a for p in parts]),
            block_diag(*[p.b for p in parts]),
            block_diag(*[p.c for p in parts]),
            block_diag(*[p.d for p in parts]),
        )

    def reset(self):
        self.state = np.zeros(self.a.shape[0])

    def output(self, u: np.ndarray) -> np.ndarray:
        return self.c @ self.state + self.d @ u

    def step(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        y = self.output(u)
        self.state = self.a @ self.state + self.b @ u
        return y


class RigidBodyController:
    """Diagonal PID bank plus mass (and optional snap) feedforward, in decoupled coordinates."""

    def __init__(self, design: RigidBodyDesign):
        self.design = design
        self.feedback = DiscreteStateSpace.diagonal([pid.controller for pid in design.pid])
        self.mass = np.array([ff.mass if ff.enabled else 0.0 for ff in design.feedforward])
        self.snap_gain = np.array(
            [ff.snap_gain if ff.enabled else 0.0 for ff in design.feedforward]
        )

    def reset(self):
        self.feedback.reset()

    def step(self, error: np.ndarray) -> np.ndarray:
        return self.feedback.step(error)

    def feedforward(
        self, acceleration: np.ndarray, snap: Optional[np.ndarray] = None
    ) -> np.ndarray:
        out = self.mass * acceleration
        if snap is not None:
            out = out + self.snap_gain * snap
        return out


class FlexModeController:
    """u_FM = K_BP (K_s q_pos + K_d q_vel), with one band-pass per controlled mode."""

    def __init__(self, gains: FlexGains, bandpass: BandPass, n_rb: int, keep: list[int]):
        self.gains = gains
        self.n_ctl = len(gains.controlled)
        offset = 2 * n_rb
        slots = [keep.index(mode) for mode in gains.controlled]
        self.position_index = np.array([offset + 2 * s for s in slots], dtype=int)
        self.velocity_index = self.position_index + 1
        sections = bandpass.sections
        self.filters = DiscreteStateSpace.diagonal(sections + sections)
        self.k_fm = gains.k_fm

    def reset(self):
        self.filters.reset()

    def step(self, q_hat: np.ndarray) -> np.ndarray:
        """Command from the scheduled estimate of the previous tick."""
        signals = np.concatenate([q_hat[self.position_index], q_hat[self.velocity_index]])
        return self.k_fm @ self.filters.step(signals)

    def selector(self, n_states: int) -> np.ndarray:
        """Rows picking the filtered signals (positions, then velocities) out of q_hat."""
        index = np.concatenate([self.position_index, self.velocity_index])
        out = np.zeros((len(index), n_states))
        out[np.arange(len(index)), index] = 1.0
        return out
