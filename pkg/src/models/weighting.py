import numpy as np
from pydantic import BaseModel, Field

from src.models.base import Array, ArrayModel
from src.models.plant import PointLike, SchedulingPoint, as_point
from src.numerics.polynomials import monomials


class SpatialBasis(BaseModel):
    m_x: int = Field(ge=0)
    m_y: int = Field(ge=0)

    @property
    def n_chi(self) -> int:
        return (self.m_x + 1) * (self.m_y + 1)

    def chi(self, p: PointLike) -> np.ndarray:
        """Monomial row (q_x^0..q_x^m_x) kron (q_y^0..q_y^m_y)."""
        p = as_point(p)
        return monomials(p.q_x, p.q_y, (self.m_x, self.m_y))


class WeightingScheme(ArrayModel):
    """Polynomial weights W_i(p) = chi(p) @ theta[i] of the local predictions."""

    basis: SpatialBasis
    theta: Array
    points: list[SchedulingPoint]
    anchor_weights: Array
    constraint_residual: float = 0.0
    fit_residual: float = 0.0
    infeasible: bool = False
    degenerate: bool = False
    trained: bool = False

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    def weights(self, p: PointLike) -> np.ndarray:
        return self.theta @ self.basis.chi(p)

    def combine(self, p: PointLike, predictions: np.ndarray) -> np.ndarray:
        """
        Weighted sum of local predictions.

        Args:
            p (PointLike): Scheduling point.
            predictions (np.ndarray): Local predictions, shape (n, n_states).

        Returns:
            np.ndarray: The scheduled prediction.
        """
        predictions = np.asarray(predictions, float)
        if predictions.shape[0] != self.n:
            raise ValueError(f"Expected {self.n} local predictions, got {predictions.shape[0]}")
        return self.weights(p) @ predictions


class RegressionData(ArrayModel):
    e: Array
    u: Array
    x: Array
    j: Array
    n_samples: int
    n_observers: int
    basis: SpatialBasis
    points: list[SchedulingPoint]
