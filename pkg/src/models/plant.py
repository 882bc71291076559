from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, model_validator

from src.errors import OutOfWorkspaceError, RankDeficientError
from src.models.base import Array, ArrayModel
from src.numerics import polynomials


class Workspace(BaseModel):
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    @model_validator(mode="after")
    def _ordered(self):
        if self.x_lo > self.x_hi or self.y_lo > self.y_hi:
            raise ValueError("Workspace bounds must satisfy lo <= hi")
        return self

    @property
    def center(self) -> "SchedulingPoint":
        return SchedulingPoint(q_x=0.5 * (self.x_lo + self.x_hi), q_y=0.5 * (self.y_lo + self.y_hi))

    def contains(self, p: "SchedulingPoint", atol: float = 1e-12) -> bool:
        return (
            self.x_lo - atol <= p.q_x <= self.x_hi + atol
            and self.y_lo - atol <= p.q_y <= self.y_hi + atol
        )

    def grid(self, nx: int, ny: int) -> list["SchedulingPoint"]:
        """Rectangular grid of scheduling points, x-major."""
        xs = np.linspace(self.x_lo, self.x_hi, nx) if nx > 1 else [self.center.q_x]
        ys = np.linspace(self.y_lo, self.y_hi, ny) if ny > 1 else [self.center.q_y]
        return [SchedulingPoint(q_x=float(x), q_y=float(y)) for x in xs for y in ys]


class SchedulingPoint(BaseModel):
    q_x: float
    q_y: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.q_x, self.q_y)


PointLike = Union[SchedulingPoint, tuple[float, float]]


def as_point(p: PointLike) -> SchedulingPoint:
    if isinstance(p, SchedulingPoint):
        return p
    return SchedulingPoint(q_x=float(p[0]), q_y=float(p[1]))


class PositionPolynomial(ArrayModel):
    """Matrix-valued polynomial in (q_x, q_y); see src.numerics.polynomials for the layout."""

    coefficients: Array
    workspace: Workspace

    @model_validator(mode="after")
    def _four_dimensional(self):
        if self.coefficients.ndim != 4:
            raise ValueError(
                f"Polynomial coefficients need 4 dimensions, got shape {self.coefficients.shape}"
            )
        return self

    @classmethod
    def constant(cls, matrix: np.ndarray, workspace: Workspace) -> "PositionPolynomial":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(coefficients=matrix[:, :, None, None], workspace=workspace)

    @property
    def degree(self) -> tuple[int, int]:
        return (self.coefficients.shape[2] - 1, self.coefficients.shape[3] - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.coefficients.shape[0], self.coefficients.shape[1])

    def __call__(self, p: PointLike) -> np.ndarray:
        p = as_point(p)
        return polynomials.evaluate(self.coefficients, p.q_x, p.q_y)

    def _wrap(self, coefficients: np.ndarray) -> "PositionPolynomial":
        return PositionPolynomial(coefficients=coefficients, workspace=self.workspace)

    def __add__(self, other: "PositionPolynomial") -> "PositionPolynomial":
        return self._wrap(polynomials.add(self.coefficients, other.coefficients))

    def __matmul__(self, other: Union["PositionPolynomial", np.ndarray]) -> "PositionPolynomial":
        if isinstance(other, PositionPolynomial):
            return self._wrap(polynomials.matmul(self.coefficients, other.coefficients))
        return self._wrap(polynomials.scale_right(self.coefficients, np.asarray(other, float)))

    def __rmatmul__(self, other: np.ndarray) -> "PositionPolynomial":
        return self._wrap(polynomials.scale_left(np.asarray(other, float), self.coefficients))

    def __neg__(self) -> "PositionPolynomial":
        return self._wrap(-self.coefficients)

    def rows(self, index) -> "PositionPolynomial":
        return self._wrap(self.coefficients[index, :])

    def columns(self, index) -> "PositionPolynomial":
        return self._wrap(self.coefficients[:, index])

    def trimmed(self, atol: float = 0.0) -> "PositionPolynomial":
        return self._wrap(polynomials.trim(self.coefficients, atol))

    def determinant(self) -> "PositionPolynomial":
        return self._wrap(polynomials.determinant(self.coefficients))

    def adjugate(self) -> "PositionPolynomial":
        return self._wrap(polynomials.adjugate(self.coefficients))


class MechModel(ArrayModel):
    M: Array
    D: Array
    K: Array
    Phi_a: Array
    Phi_s: PositionPolynomial

    @model_validator(mode="after")
    def _shapes(self):
        n = self.M.shape[0]
        for name in ("M", "D", "K"):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {getattr(self, name).shape}")
        if self.Phi_a.ndim != 2 or self.Phi_a.shape[0] != n:
            raise ValueError(f"Phi_a must have {n} rows, got shape {self.Phi_a.shape}")
        if self.Phi_s.shape[1] != n:
            raise ValueError(f"Phi_s must have {n} columns, got {self.Phi_s.shape[1]}")
        return self

    @property
    def n_x(self) -> int:
        return self.M.shape[0]

    @property
    def n_u(self) -> int:
        return self.Phi_a.shape[1]

    @property
    def n_y(self) -> int:
        return self.Phi_s.shape[0]

    @property
    def workspace(self) -> Workspace:
        return self.Phi_s.workspace


class ModalForm(ArrayModel):
    omega: Array
    zeta: Array
    vtilde: Array
    b_modal: Array
    c_modal: PositionPolynomial
    n_rb: int

    @property
    def Omega(self) -> np.ndarray:
        return np.diag(self.omega)

    @property
    def Z(self) -> np.ndarray:
        return np.diag(self.zeta)

    @property
    def n_fm(self) -> int:
        return len(self.omega) - self.n_rb


def mode_block(omega: float, zeta: float) -> np.ndarray:
    return np.array([[0.0, 1.0], [-(omega**2), -2.0 * zeta * omega]])


def block_diagonal(omega: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    n = len(omega)
    out = np.zeros((2 * n, 2 * n))
    for i, (w, z) in enumerate(zip(omega, zeta)):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = mode_block(w, z)
    return out


def velocity_rows(b: np.ndarray) -> np.ndarray:
    """Input map of (position, velocity) pairs: zero position rows, b on velocity rows."""
    out = np.zeros((2 * b.shape[0], b.shape[1]))
    out[1::2] = b
    return out


def position_columns(c: PositionPolynomial) -> PositionPolynomial:
    """Output map of (position, velocity) pairs: c on position columns, zero velocity columns."""
    rows, cols, nx, ny = c.coefficients.shape
    out = np.zeros((rows, 2 * cols, nx, ny))
    out[:, 0::2] = c.coefficients
    return PositionPolynomial(coefficients=out, workspace=c.workspace)


class PartitionedLpvPlant(ArrayModel):
    a_rb: Array
    a_fm: Array
    b_rb: Array
    b_fm: Array
    c_rb: PositionPolynomial
    c_fm: PositionPolynomial
    omega_fm: Array
    zeta_fm: Array
    n_rb: int

    @property
    def n_fm(self) -> int:
        return len(self.omega_fm)

    @property
    def n_states(self) -> int:
        return 2 * (self.n_rb + self.n_fm)

    @property
    def workspace(self) -> Workspace:
        return self.c_rb.workspace

    def rigid_positions(self) -> PositionPolynomial:
        return self.c_rb.columns(slice(0, None, 2))

    def rigid_velocity_block(self) -> np.ndarray:
        return self.b_rb[1::2]


class OutputDecoupling(ArrayModel):
    """T_y(p): exact polynomial inverse when available, per-point pseudoinverse otherwise."""

    c_rb_positions: PositionPolynomial
    exact: Optional[PositionPolynomial] = None
    cond_limit: float = 1e8

    def __call__(self, p: PointLike) -> np.ndarray:
        if self.exact is not None:
            return self.exact(p)
        c = self.c_rb_positions(p)
        if np.linalg.cond(c) > self.cond_limit:
            raise RankDeficientError(
                f"Rigid-body output block has condition number {np.linalg.cond(c):.3g}",
                point=as_point(p).as_tuple(),
            )
        return np.linalg.pinv(c)


class FrozenPlant(ArrayModel):
    """Constant-matrix state space of the decoupled plant at one scheduling point."""

    a: Array
    b: Array
    c: Array
    d: Array
    point: SchedulingPoint


class DecoupledPlant(ArrayModel):
    a_rb: Array
    a_fm: Array
    b_fm: Array
    b_force: Array
    t_u: Array
    c_fm_raw: PositionPolynomial
    output: OutputDecoupling
    omega_fm: Array
    zeta_fm: Array
    n_rb: int
    allow_extrapolation: bool = False

    @property
    def n_fm(self) -> int:
        return len(self.omega_fm)

    @property
    def n_u(self) -> int:
        return self.t_u.shape[0]

    @property
    def n_states(self) -> int:
        return 2 * (self.n_rb + self.n_fm)

    @property
    def workspace(self) -> Workspace:
        return self.c_fm_raw.workspace

    def a(self) -> np.ndarray:
        n_rb2 = 2 * self.n_rb
        out = np.zeros((self.n_states, self.n_states))
        out[:n_rb2, :n_rb2] = self.a_rb
        out[n_rb2:, n_rb2:] = self.a_fm
        return out

    def b(self) -> np.ndarray:
        """Decoupled input map; rigid velocity rows are the identity."""
        return np.vstack([velocity_rows(np.eye(self.n_rb)), self.b_fm])

    def b_physical(self) -> np.ndarray:
        """Input map of forces in actuator coordinates (before T_u)."""
        return self.b_force

    def c_rb(self) -> np.ndarray:
        out = np.zeros((self.n_rb, 2 * self.n_rb))
        out[:, 0::2] = np.eye(self.n_rb)
        return out

    def check_point(self, p: PointLike) -> SchedulingPoint:
        p = as_point(p)
        if not self.allow_extrapolation and not self.workspace.contains(p):
            raise OutOfWorkspaceError("Scheduling point outside the workspace", point=p.as_tuple())
        return p

    def t_y(self, p: PointLike) -> np.ndarray:
        return self.output(p)

    def c_fm(self, p: PointLike) -> np.ndarray:
        return self.t_y(p) @ self.c_fm_raw(p)

    def c(self, p: PointLike) -> np.ndarray:
        return np.hstack([self.c_rb(), self.c_fm(p)])

    def c_raw(self, p: PointLike) -> np.ndarray:
        """Sensor-frame output map; decoupling is applied as T_y(p) @ c_raw(p)."""
        c_rb = np.zeros((self.output.c_rb_positions.shape[0], 2 * self.n_rb))
        c_rb[:, 0::2] = self.output.c_rb_positions(p)
        return np.hstack([c_rb, self.c_fm_raw(p)])

    def freeze(self, p: PointLike) -> FrozenPlant:
        p = self.check_point(p)
        return FrozenPlant(
            a=self.a(), b=self.b(), c=self.c(p), d=np.zeros((self.n_rb, self.n_rb)), point=p
        )


class TruncatedPlant(ArrayModel):
    keep: list[int]
    a_rb: Array
    a_fm: Array
    b_fm: Array
    c_fm_raw: PositionPolynomial
    dc_raw: PositionPolynomial
    output: OutputDecoupling
    omega_fm: Array
    zeta_fm: Array
    n_rb: int

    @property
    def n_fm(self) -> int:
        return len(self.keep)

    @property
    def n_states(self) -> int:
        return 2 * (self.n_rb + self.n_fm)

    @property
    def workspace(self) -> Workspace:
        return self.c_fm_raw.workspace

    def a(self) -> np.ndarray:
        n_rb2 = 2 * self.n_rb
        out = np.zeros((self.n_states, self.n_states))
        out[:n_rb2, :n_rb2] = self.a_rb
        out[n_rb2:, n_rb2:] = self.a_fm
        return out

    def b(self) -> np.ndarray:
        return np.vstack([velocity_rows(np.eye(self.n_rb)), self.b_fm])

    def c(self, p: PointLike) -> np.ndarray:
        c_rb = np.zeros((self.n_rb, 2 * self.n_rb))
        c_rb[:, 0::2] = np.eye(self.n_rb)
        return np.hstack([c_rb, self.output(p) @ self.c_fm_raw(p)])

    def dc(self, p: PointLike) -> np.ndarray:
        return self.output(p) @ self.dc_raw(p)
