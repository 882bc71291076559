import logging

import numpy as np

from src.components.observer_synthesizers.base_observer_synthesizer import (
    BaseObserverSynthesizer,
)
from src.errors import NumericalError
from src.models import (
    DiscreteModel,
    LocalObserver,
    NoiseDesign,
    ObserverBank,
    SchedulingPoint,
    TruncatedPlant,
)
from src.numerics.discretization import zoh_discretize
from src.numerics.riccati import riccati_residual, solve_dare, spectral_radius

logger = logging.getLogger(__name__)


class RiccatiObserverBank(BaseObserverSynthesizer):
    """One stationary one-step-ahead predictor per grid point, gains from the DARE."""

    def run(
        self, truncated: TruncatedPlant, grid: list[SchedulingPoint]
    ) -> tuple[ObserverBank, NoiseDesign]:
        ts = self.settings.observer.ts
        a, b = zoh_discretize(truncated.a(), truncated.b(), ts)
        noise = self.default_noise(b, truncated.n_rb)
        return self.synthesize_bank(truncated, grid, noise, ts), noise

    def default_noise(self, b_discrete: np.ndarray, n_outputs: int) -> NoiseDesign:
        """Input-shaped process noise with an identity floor, white measurement noise."""
        cfg = self.settings.observer
        n = b_discrete.shape[0]
        qw = cfg.qw_scale * (b_discrete @ b_discrete.T + cfg.qw_floor * np.eye(n))
        return NoiseDesign(qw=0.5 * (qw + qw.T), rv=cfg.rv * np.eye(n_outputs))

    def synthesize_bank(
        self,
        truncated: TruncatedPlant,
        grid: list[SchedulingPoint],
        noise: NoiseDesign,
        ts: float,
    ) -> ObserverBank:
        """
        Design a local predictor at every grid point.

        Args:
            truncated (TruncatedPlant): Observer design model.
            grid (list[SchedulingPoint]): Design points.
            noise (NoiseDesign): Process and measurement noise covariances.
            ts (float): Sampling time (s).

        Returns:
            ObserverBank: The local predictors, in grid order.
        """
        if not grid:
            raise ValueError("Observer grid is empty")
        cfg = self.settings.observer
        a, b = zoh_discretize(truncated.a(), truncated.b(), ts)
        observers = []
        for p in grid:
            c, d = truncated.c(p), truncated.dc(p)
            try:
                riccati, gain = solve_dare(
                    a, c, noise.qw, noise.rv, tol=cfg.dare_tol, max_iter=cfg.dare_max_iter
                )
            except NumericalError as e:
                raise type(e)(str(e), point=p.as_tuple()) from e
            radius = spectral_radius(a - gain @ c)
            residual = riccati_residual(a, c, noise.qw, noise.rv, riccati)
            logger.debug(
                "Observer at (%.4g, %.4g): spectral radius %.6f, residual %.3g",
                p.q_x,
                p.q_y,
                radius,
                residual,
            )
            observers.append(
                LocalObserver(
                    point=p,
                    model=DiscreteModel(a=a, b=b, c=c, d=d, ts=ts),
                    gain=gain,
                    riccati=riccati,
                    spectral_radius=radius,
                    residual=residual,
                )
            )
        logger.info(
            "Synthesized %d local observers (max spectral radius %.6f)",
            len(observers),
            max(o.spectral_radius for o in observers),
        )
        return ObserverBank(observers=observers, ts=ts, n_rb=truncated.n_rb, keep=truncated.keep)
