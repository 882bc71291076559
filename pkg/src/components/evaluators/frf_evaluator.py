import logging
from typing import Optional

import numpy as np

from src.components.evaluators.base_evaluator import BaseEvaluator
from src.errors import AboveNyquistError
from src.interconnection import LoopDesign, band_peak, frozen_loop, response
from src.models import Data, FrfData, SchedulingPoint
from src.numerics.spectral import suppression_db

logger = logging.getLogger(__name__)


class FrfEvaluator(BaseEvaluator):
    """
    Frequency responses u_RB -> y_RB of the equivalent mechanics, with the rigid-body loop open,
    with and without the flexible-mode loop, plus the resonance suppression per frozen point.
    """

    required = ("decoupled", "bank", "scheme", "flex_gains", "bandpass", "rb_design")

    def __init__(self, settings, points: Optional[str] = None):
        super().__init__(settings)
        self.points = points or ("list" if settings.analysis.frf_points else "grid")

    def extract_input(self, data: Data) -> tuple[LoopDesign, list[SchedulingPoint]]:
        design = LoopDesign(
            plant=data.decoupled,
            bank=data.bank,
            scheme=data.scheme,
            gains=data.flex_gains,
            bandpass=data.bandpass,
            rb_design=data.rb_design,
        )
        if self.points == "list":
            if not self.settings.analysis.frf_points:
                raise ValueError("--points list needs analysis.frf_points")
            points = [SchedulingPoint(q_x=x, q_y=y) for x, y in self.settings.analysis.frf_points]
        else:
            points = data.bank.points
        return design, points

    def update_data(self, data: Data, result: tuple[list[FrfData], list[float]]):
        data.frfs, data.suppression_db = result

    def frequency_grid(self, ts: float) -> np.ndarray:
        cfg = self.settings.analysis
        if cfg.f_max_hz >= 0.5 / ts or cfg.f_min_hz >= cfg.f_max_hz:
            raise AboveNyquistError(
                f"FRF grid {cfg.f_min_hz}-{cfg.f_max_hz} Hz must be increasing and below "
                f"Nyquist ({0.5 / ts:.6g} Hz)"
            )
        return np.geomspace(cfg.f_min_hz, cfg.f_max_hz, cfg.n_points)

    def run(
        self, design: LoopDesign, points: list[SchedulingPoint]
    ) -> tuple[list[FrfData], list[float]]:
        freq = self.frequency_grid(design.bank.ts)
        frfs, suppression = [], []
        for p in points:
            off, on, db = self.equivalent_mechanics_frf(design, p, freq)
            frfs.extend([off, on])
            suppression.append(db)
            logger.info("Suppression at (%.4g, %.4g): %.2f dB", p.q_x, p.q_y, db)
        return frfs, suppression

    def equivalent_mechanics_frf(
        self, design: LoopDesign, p: SchedulingPoint, freq: np.ndarray
    ) -> tuple[FrfData, FrfData, float]:
        """
        Args:
            design (LoopDesign): Plant, observers, combiner and controllers.
            p (SchedulingPoint): Frozen scheduling point.
            freq (np.ndarray): Frequency grid (Hz).

        Returns:
            tuple: FRF without and with the flexible-mode loop, and the peak suppression in dB.
        """
        cfg = self.settings.analysis
        systems = {
            enabled: frozen_loop(design, p, enabled, rb_closed=False) for enabled in (False, True)
        }
        # Resonance peaks are far narrower than the log grid; add them explicitly
        peaks = [band_peak(system, cfg.mode_band_hz, cfg.channel)[0] for system in systems.values()]
        freq = np.union1d(freq, peaks)
        frfs = {
            enabled: FrfData(
                freq_hz=freq, response=response(system, freq), point=p, flex_enabled=enabled
            )
            for enabled, system in systems.items()
        }
        db = suppression_db(
            freq,
            frfs[False].channel(*cfg.channel),
            frfs[True].channel(*cfg.channel),
            cfg.mode_band_hz,
        )
        return frfs[False], frfs[True], db
