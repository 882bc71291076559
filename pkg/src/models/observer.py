from typing import Optional

import numpy as np
from pydantic import model_validator
from scipy.linalg import block_diag

from src.errors import LengthMismatchError
from src.models.base import Array, ArrayModel
from src.models.plant import SchedulingPoint


class DiscreteModel(ArrayModel):
    """ZOH model of the truncated plant; c and d are frozen at one grid point."""

    a: Array
    b: Array
    c: Array
    d: Array
    ts: float

    @property
    def n_states(self) -> int:
        return self.a.shape[0]


class NoiseDesign(ArrayModel):
    qw: Array
    rv: Array

    @model_validator(mode="after")
    def _covariances(self):
        for name in ("qw", "rv"):
            matrix = getattr(self, name)
            if not np.allclose(matrix, matrix.T, rtol=1e-9, atol=0.0):
                raise ValueError(f"Noise covariance {name} must be symmetric")
        if np.min(np.linalg.eigvalsh(self.rv)) <= 0:
            raise ValueError("Measurement noise covariance rv must be positive definite")
        if np.min(np.linalg.eigvalsh(self.qw)) < -1e-12 * max(1.0, np.abs(self.qw).max()):
            raise ValueError("Process noise covariance qw must be positive semidefinite")
        return self


class LocalObserver(ArrayModel):
    """One-step-ahead predictor designed at a single grid point."""

    point: SchedulingPoint
    model: DiscreteModel
    gain: Array
    riccati: Array
    spectral_radius: float
    residual: float
    state: Optional[Array] = None

    def closed_a(self) -> np.ndarray:
        return self.model.a - self.gain @ self.model.c

    def closed_b(self) -> np.ndarray:
        """Input map of the stacked input (u_tilde, y)."""
        return np.hstack([self.model.b - self.gain @ self.model.d, self.gain])

    def reset(self, state: Optional[np.ndarray] = None):
        self.state = np.zeros(self.model.n_states) if state is None else np.array(state, float)

    def step(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Advance the predictor one tick.

        Args:
            u (np.ndarray): Decoupled input u_tilde(k).
            y (np.ndarray): Decoupled rigid-body measurement y(k).

        Returns:
            np.ndarray: The prediction q_hat(k+1|k).
        """
        if self.state is None:
            self.reset()
        self.state = self.closed_a() @ self.state + self.closed_b() @ np.concatenate([u, y])
        return self.state


class ObserverBank(ArrayModel):
    observers: list[LocalObserver]
    ts: float
    n_rb: int
    keep: list[int]
    state: Optional[Array] = None

    @model_validator(mode="after")
    def _distinct_points(self):
        points = {obs.point.as_tuple() for obs in self.observers}
        if len(points) != len(self.observers):
            raise ValueError("Observer grid points must be distinct")
        return self

    @property
    def n(self) -> int:
        return len(self.observers)

    @property
    def n_states(self) -> int:
        return self.observers[0].model.n_states

    @property
    def points(self) -> list[SchedulingPoint]:
        return [obs.point for obs in self.observers]

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Block-diagonal dynamics and stacked input map of all predictors."""
        a = block_diag(*[obs.closed_a() for obs in self.observers])
        b = np.vstack([obs.closed_b() for obs in self.observers])
        return a, b

    def reset(self):
        self.state = np.zeros(self.n * self.n_states)

    def step_all(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Advance every local predictor with the same input and measurement.

        Returns:
            np.ndarray: Local predictions, shape (n, n_states).
        """
        if self.state is None:
            self.reset()
        a, b = self.stacked()
        self.state = a @ self.state + b @ np.concatenate([u, y])
        return self.state.reshape(self.n, self.n_states)

    @property
    def rigid_index(self) -> int:
        """Observer supplying the rigid-body estimate: the grid point nearest the grid centroid."""
        coordinates = np.array([p.as_tuple() for p in self.points])
        distance = np.linalg.norm(coordinates - coordinates.mean(axis=0), axis=1)
        return int(np.argmin(distance))

    def flex_slice(self) -> slice:
        """State indices of the retained flexible modes inside one prediction."""
        return slice(2 * self.n_rb, self.n_states)

    def replay(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Local predictions over a recorded run, from a zero initial state.

        Args:
            u (np.ndarray): Decoupled inputs u_tilde, shape (N, n_u).
            y (np.ndarray): Decoupled measurements, shape (N, n_y).

        Returns:
            np.ndarray: Predictions q_i(k+1|k), shape (N, n, n_states).
        """
        if len(u) != len(y):
            raise LengthMismatchError(f"Record lengths differ: u has {len(u)}, y has {len(y)}")
        a, b = self.stacked()
        z = np.zeros(a.shape[0])
        out = np.zeros((len(u), self.n, self.n_states))
        for k, signals in enumerate(np.hstack([u, y])):
            z = a @ z + b @ signals
            out[k] = z.reshape(self.n, self.n_states)
        return out
