import logging
from typing import Optional

import numpy as np

from src.components.decouplers.base_decoupler import BaseDecoupler
from src.errors import RankDeficientError
from src.models import (
    DecoupledPlant,
    OutputDecoupling,
    PartitionedLpvPlant,
    PositionPolynomial,
    SchedulingPoint,
)

logger = logging.getLogger(__name__)


class PseudoinverseDecoupler(BaseDecoupler):
    """T_u = pinv(rigid velocity rows of B), T_y(p) = pinv(rigid position columns of C(p))."""

    def run(self, plant: PartitionedLpvPlant, grid: list[SchedulingPoint]) -> DecoupledPlant:
        return self.decouple(plant, grid)

    def exact_inverse(self, c_positions: PositionPolynomial) -> Optional[PositionPolynomial]:
        """Adjugate / determinant, when the determinant is a nonzero constant polynomial."""
        rows, cols = c_positions.shape
        if rows != cols:
            return None
        det = c_positions.determinant()
        scale = max(np.abs(det.coefficients).max(), np.finfo(float).tiny)
        det = det.trimmed(atol=1e-13 * scale)
        if det.degree != (0, 0):
            return None
        value = float(det.coefficients[0, 0, 0, 0])
        if abs(value) < 1.0 / self.settings.tolerances.cond_limit:
            return None
        inverse = c_positions.adjugate()
        return PositionPolynomial(
            coefficients=inverse.coefficients / value, workspace=c_positions.workspace
        )

    def decouple(self, plant: PartitionedLpvPlant, grid: list[SchedulingPoint]) -> DecoupledPlant:
        """
        Decouple the rigid-body channels and check the result on every grid point.

        Args:
            plant (PartitionedLpvPlant): Partitioned modal plant.
            grid (list[SchedulingPoint]): Points on which the output decoupling is verified.

        Returns:
            DecoupledPlant: Plant with identity rigid-body input and output maps.
        """
        cond_limit = self.settings.tolerances.cond_limit
        b_velocity = plant.rigid_velocity_block()
        if plant.n_rb == 0:
            raise RankDeficientError("Plant has no rigid-body modes to decouple")
        if b_velocity.shape[1] < plant.n_rb or np.linalg.cond(b_velocity) > cond_limit:
            raise RankDeficientError(
                f"Rigid-body input block {b_velocity.shape} is rank deficient "
                f"(condition number {np.linalg.cond(b_velocity):.3g})"
            )
        t_u = np.linalg.pinv(b_velocity)

        c_positions = plant.rigid_positions()
        if c_positions.shape[0] < plant.n_rb:
            raise RankDeficientError(
                f"{c_positions.shape[0]} outputs cannot observe {plant.n_rb} rigid-body modes"
            )
        output = OutputDecoupling(
            c_rb_positions=c_positions,
            exact=self.exact_inverse(c_positions),
            cond_limit=cond_limit,
        )
        for p in grid:
            residual = np.linalg.norm(output(p) @ c_positions(p) - np.eye(plant.n_rb))
            if residual > 1e-8:
                raise RankDeficientError(
                    f"Output decoupling leaves residual {residual:.3g}", point=p.as_tuple()
                )
        logger.info(
            "Decoupled %d rigid-body channels (%s output rule)",
            plant.n_rb,
            "exact polynomial" if output.exact is not None else "per-point pseudoinverse",
        )

        return DecoupledPlant(
            a_rb=plant.a_rb,
            a_fm=plant.a_fm,
            b_fm=plant.b_fm @ t_u,
            b_force=np.vstack([plant.b_rb, plant.b_fm]),
            t_u=t_u,
            c_fm_raw=plant.c_fm,
            output=output,
            omega_fm=plant.omega_fm,
            zeta_fm=plant.zeta_fm,
            n_rb=plant.n_rb,
            allow_extrapolation=self.settings.workspace.allow_extrapolation,
        )
