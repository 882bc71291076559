import logging

import numpy as np

from src.components.flex_designers.base_flex_designer import BaseFlexDesigner
from src.errors import RankDeficientActuationError
from src.models import (
    BandPass,
    DecoupledPlant,
    DiscreteFilter,
    FlexGains,
    ModalTargets,
    TruncatedPlant,
)
from src.numerics.filters import squared_bandpass

logger = logging.getLogger(__name__)


class ModalFeedbackDesigner(BaseFlexDesigner):
    """
    Active stiffness and damping that move each controlled mode to its target eigenvalue pair,
    plus the squared band-pass that confines the action to the mode's frequency band.
    """

    def run(self, plant: DecoupledPlant, truncated: TruncatedPlant) -> tuple[FlexGains, BandPass]:
        settings = self.settings.flex_control
        missing = [m for m in settings.controlled if m not in truncated.keep]
        if missing:
            raise ValueError(f"Controlled modes {missing} are not retained by the observers")
        omega = plant.omega_fm[settings.controlled]
        omega_star = (
            2 * np.pi * np.asarray(settings.omega_target_hz)
            if settings.omega_target_hz is not None
            else omega
        )
        targets = ModalTargets(
            controlled=settings.controlled,
            zeta_star=np.asarray(settings.zeta_target, dtype=float),
            omega_star=omega_star,
        )
        gains = self.gate_unobservable(plant, self.design_gains(plant, targets))
        return gains, self.make_bandpass(omega, settings.q, self.settings.observer.ts)

    def gate_unobservable(self, plant: DecoupledPlant, gains: FlexGains) -> FlexGains:
        """Zero the gains of controlled modes that no sensor reads anywhere in the workspace."""
        rtol = self.settings.tolerances.readout_rtol
        scale = np.max(np.abs(plant.output.c_rb_positions.coefficients))
        coefficients = plant.c_fm_raw.coefficients
        k_s, k_d = gains.k_s.copy(), gains.k_d.copy()
        for column, mode in enumerate(gains.controlled):
            readout = np.max(np.abs(coefficients[:, 2 * mode : 2 * mode + 2]))
            if readout <= rtol * scale:
                logger.warning(
                    "Flexible mode %d has no sensor readout (%.3g); its gains are set to zero",
                    mode,
                    readout,
                )
                k_s[:, column] = 0.0
                k_d[:, column] = 0.0
        return FlexGains(controlled=gains.controlled, k_s=k_s, k_d=k_d)

    @staticmethod
    def design_gains(plant: DecoupledPlant, targets: ModalTargets) -> FlexGains:
        """
        K_s = -b^+ (Omega*^2 - Omega^2), K_d = -b^+ (2 Z* Omega* - 2 Z Omega).

        Args:
            plant (DecoupledPlant): Plant whose flexible input rows are in decoupled coordinates.
            targets (ModalTargets): Controlled modes and their target damping and frequency.

        Returns:
            FlexGains: Gains mapping modal position and velocity estimates to decoupled inputs.
        """
        controlled = targets.controlled
        b = plant.b_fm[[2 * m + 1 for m in controlled]]
        rank = np.linalg.matrix_rank(b)
        if rank < len(controlled):
            raise RankDeficientActuationError(
                f"Controlled modes {controlled} have actuation rank {rank} < {len(controlled)}"
            )
        omega = plant.omega_fm[controlled]
        zeta = plant.zeta_fm[controlled]
        b_pinv = np.linalg.pinv(b)
        k_s = -b_pinv @ np.diag(targets.omega_star**2 - omega**2)
        k_d = -b_pinv @ np.diag(2 * targets.zeta_star * targets.omega_star - 2 * zeta * omega)
        logger.info(
            "Flexible-mode gains for modes %s: damping %s -> %s",
            controlled,
            np.round(zeta, 5).tolist(),
            np.round(targets.zeta_star, 5).tolist(),
        )
        return FlexGains(controlled=list(controlled), k_s=k_s, k_d=k_d)

    @staticmethod
    def make_bandpass(omega: np.ndarray, q: float, ts: float) -> BandPass:
        sections = [
            DiscreteFilter(num=num, den=den, ts=ts)
            for num, den in (squared_bandpass(w, q, ts) for w in omega)
        ]
        return BandPass(omega=np.asarray(omega, dtype=float), q=q, ts=ts, sections=sections)
