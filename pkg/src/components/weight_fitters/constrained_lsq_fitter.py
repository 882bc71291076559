import logging
from typing import Optional

import numpy as np

from src.components.weight_fitters.base_weight_fitter import BaseWeightFitter
from src.errors import InfeasibleConstraintsError, LengthMismatchError
from src.models import (
    ObserverBank,
    RegressionData,
    SchedulingPoint,
    SimTrace,
    SpatialBasis,
    WeightingScheme,
)
from src.numerics.lse import solve_constrained_lstsq

logger = logging.getLogger(__name__)


def constraint_system(
    points: list[SchedulingPoint], basis: SpatialBasis
) -> tuple[np.ndarray, np.ndarray]:
    """Rows W_i(p_j) = delta_ij for every grid point p_j, observer-major coefficients."""
    n = len(points)
    x = np.vstack([np.kron(np.eye(n), basis.chi(p)[None, :]) for p in points])
    j = np.concatenate([np.eye(n)[idx] for idx in range(n)])
    return x, j


class ConstrainedLsqFitter(BaseWeightFitter):
    """
    Fits W_i(p) = chi(p) theta_i by least squares on a training trace, subject to the grid
    anchoring constraints. Without a trace the scheme follows from the constraints alone.
    """

    def __init__(self, settings, strict: Optional[bool] = None):
        super().__init__(settings)
        self.strict = settings.weighting.strict_constraints if strict is None else strict

    @property
    def basis(self) -> SpatialBasis:
        return SpatialBasis(m_x=self.settings.weighting.m_x, m_y=self.settings.weighting.m_y)

    def run(
        self, bank: ObserverBank, trace: Optional[SimTrace]
    ) -> tuple[WeightingScheme, Optional[RegressionData]]:
        if trace is None:
            return self.anchor_scheme(bank.points, self.basis), None
        data = self.assemble_regression(trace, bank, self.basis)
        return self.solve_lse(data), data

    @staticmethod
    def assemble_regression(
        trace: SimTrace, bank: ObserverBank, basis: SpatialBasis
    ) -> RegressionData:
        """
        Stack one block per sample: U_k = [q_1 .. q_n] kron chi(p(k)), E_k = q(k+1).

        Only the retained flexible states enter; the target is the true state of the
        full-order simulation one tick after the local predictions were formed.
        """
        if trace.local is None:
            raise ValueError("Training trace has no local predictions")
        n_samples = trace.p.shape[0]
        if trace.local.shape[0] != n_samples or trace.modal.shape[0] != n_samples:
            raise LengthMismatchError(
                f"Trace lengths differ: p={n_samples}, local={trace.local.shape[0]}, "
                f"modal={trace.modal.shape[0]}"
            )
        if trace.local.shape[1] != bank.n:
            raise LengthMismatchError(
                f"Trace has {trace.local.shape[1]} local predictions, bank has {bank.n}"
            )
        flex = bank.flex_slice()
        n_rb = bank.n_rb
        true_index = np.ravel([[2 * (n_rb + m), 2 * (n_rb + m) + 1] for m in bank.keep])

        blocks_u, blocks_e = [], []
        for k in range(n_samples - 1):
            chi = basis.chi(trace.p[k])
            local = trace.local[k][:, flex].T
            blocks_u.append(np.kron(local, chi[None, :]))
            blocks_e.append(trace.modal[k + 1, true_index])
        x, j = constraint_system(bank.points, basis)
        return RegressionData(
            e=np.concatenate(blocks_e),
            u=np.vstack(blocks_u),
            x=x,
            j=j,
            n_samples=n_samples - 1,
            n_observers=bank.n,
            basis=basis,
            points=bank.points,
        )

    def solve_lse(self, data: RegressionData) -> WeightingScheme:
        """
        Least-squares fit over the least-squares solutions of the anchoring constraints.

        Args:
            data (RegressionData): Stacked regression and constraint system.

        Returns:
            WeightingScheme: The fitted weights, flagged when the constraints are inconsistent.
        """
        solution = solve_constrained_lstsq(data.u, data.e, data.x, data.j)
        if solution.degenerate:
            logger.warning("Regressor is rank deficient after constraint elimination")
        return self._scheme(
            data.basis,
            data.points,
            solution.f,
            solution.constraint_residual,
            solution.fit_residual,
            solution.degenerate,
            trained=True,
        )

    def anchor_scheme(self, points: list[SchedulingPoint], basis: SpatialBasis) -> WeightingScheme:
        """Minimum-norm least-squares solution of the anchoring constraints alone."""
        x, j = constraint_system(points, basis)
        f = np.linalg.pinv(x, rcond=1e-12) @ j
        return self._scheme(
            basis, points, f, float(np.linalg.norm(x @ f - j)), 0.0, False, trained=False
        )

    def _scheme(
        self,
        basis: SpatialBasis,
        points: list[SchedulingPoint],
        f: np.ndarray,
        constraint_residual: float,
        fit_residual: float,
        degenerate: bool,
        trained: bool,
    ) -> WeightingScheme:
        n = len(points)
        theta = f.reshape(n, basis.n_chi)
        anchor = np.column_stack([theta @ basis.chi(p) for p in points])
        infeasible = constraint_residual > self.settings.weighting.feasibility_tol
        if infeasible:
            message = (
                f"Anchoring constraints are inconsistent for {n} observers with "
                f"m_x={basis.m_x}, m_y={basis.m_y}: residual {constraint_residual:.3g}"
            )
            if self.strict:
                raise InfeasibleConstraintsError(message)
            logger.warning(message)
        logger.info(
            "Weighting scheme: %d observers, %d coefficients each, constraint residual %.3g",
            n,
            basis.n_chi,
            constraint_residual,
        )
        return WeightingScheme(
            basis=basis,
            theta=theta,
            points=points,
            anchor_weights=anchor,
            constraint_residual=constraint_residual,
            fit_residual=fit_residual,
            infeasible=infeasible,
            degenerate=degenerate,
            trained=trained,
        )
