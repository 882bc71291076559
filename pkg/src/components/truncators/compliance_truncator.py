import logging

import numpy as np

from src.components.truncators.base_truncator import BaseTruncator
from src.errors import SingularDiscardedBlockError
from src.models import DecoupledPlant, PositionPolynomial, TruncatedPlant
from src.models.plant import block_diagonal

logger = logging.getLogger(__name__)


class ComplianceTruncator(BaseTruncator):
    """Keeps the configured flexible modes; discarded modes survive as a static compliance."""

    def __init__(self, settings, keep: list[int] | None = None):
        super().__init__(settings)
        self.keep = keep

    def run(self, plant: DecoupledPlant) -> TruncatedPlant:
        keep = self.keep if self.keep is not None else self.settings.observer.keep
        return self.truncate(plant, keep)

    def truncate(self, plant: DecoupledPlant, keep: list[int]) -> TruncatedPlant:
        """
        Args:
            plant (DecoupledPlant): Decoupled plant.
            keep (list[int]): Retained flexible modes (0-based among the flexible modes).

        Returns:
            TruncatedPlant: Retained modes plus the compliance feed-through of the others.
        """
        keep = sorted(set(keep))
        if not keep or keep[0] < 0 or keep[-1] >= plant.n_fm:
            raise ValueError(
                f"keep must be a nonempty subset of the {plant.n_fm} flexible modes, got {keep}"
            )
        discard = [i for i in range(plant.n_fm) if i not in keep]
        rigid_tol = self.settings.tolerances.rigid_tol

        n_y = plant.c_fm_raw.shape[0]
        compliance = PositionPolynomial(
            coefficients=np.zeros((n_y, plant.n_rb, 1, 1)), workspace=plant.workspace
        )
        for mode in discard:
            omega = plant.omega_fm[mode]
            if omega <= rigid_tol:
                raise SingularDiscardedBlockError(
                    f"Discarded flexible mode {mode} has zero frequency"
                )
            c = plant.c_fm_raw.columns(slice(2 * mode, 2 * mode + 1))
            b = plant.b_fm[2 * mode + 1 : 2 * mode + 2]
            compliance = compliance + (c @ (b / omega**2))

        states = np.ravel([[2 * i, 2 * i + 1] for i in keep])
        logger.info("Retained flexible modes %s, compliance from %s", keep, discard or "none")
        return TruncatedPlant(
            keep=keep,
            a_rb=plant.a_rb,
            a_fm=block_diagonal(plant.omega_fm[keep], plant.zeta_fm[keep]),
            b_fm=plant.b_fm[states],
            c_fm_raw=plant.c_fm_raw.columns(states),
            dc_raw=compliance,
            output=plant.output,
            omega_fm=plant.omega_fm[keep],
            zeta_fm=plant.zeta_fm[keep],
            n_rb=plant.n_rb,
        )
