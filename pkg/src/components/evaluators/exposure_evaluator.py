import logging

import numpy as np

from src.components.evaluators.base_evaluator import BaseEvaluator
from src.models import CpsCurve, Data, ExposureMetrics, MetricRecord, SimTrace
from src.numerics.spectral import cumulative_psd, ma_msd

logger = logging.getLogger(__name__)


def mode_step_reduction_db(off: CpsCurve, on: CpsCurve, band: tuple[float, float]) -> float:
    """Shrink of the cumulative-power step across a band, in dB of power."""
    return float(10 * np.log10(off.band_step(band) / on.band_step(band)))


class ExposureEvaluator(BaseEvaluator):
    """MA and MSD of the tracking error inside the exposure windows, plus cumulative PSDs."""

    required = ("traces",)

    def extract_input(self, data: Data) -> dict[str, SimTrace]:
        return data.traces

    def update_data(
        self, data: Data, result: tuple[dict[str, ExposureMetrics], dict[str, list[CpsCurve]]]
    ):
        metrics, cps = result
        data.metrics.update(metrics)
        data.cps.update(cps)

    def run(
        self, traces: dict[str, SimTrace]
    ) -> tuple[dict[str, ExposureMetrics], dict[str, list[CpsCurve]]]:
        metrics = {label: self.exposure_metrics(trace) for label, trace in traces.items()}
        cps = {label: self.cumulative_psd(trace) for label, trace in traces.items()}
        for label, result in metrics.items():
            for record in result.records:
                logger.info(
                    "%s %s/%s: MA %.3e, MSD %.3e",
                    label,
                    record.die,
                    record.axis,
                    record.ma_peak,
                    record.msd_peak,
                )
        return metrics, cps

    def exposure_metrics(self, trace: SimTrace) -> ExposureMetrics:
        """
        Args:
            trace (SimTrace): Closed-loop run with exposure windows.

        Returns:
            ExposureMetrics: Peak |MA| and MSD per window and axis, with the full MA/MSD traces.
        """
        window_s = self.settings.analysis.window_s
        ma, msd = ma_msd(trace.e, trace.ts, window_s)
        records = []
        for window in trace.windows:
            span = slice(window.exposure_start, window.exposure_stop)
            for index, axis in enumerate(trace.axes):
                ma_window, msd_window = ma[span, index], msd[span, index]
                valid = np.isfinite(msd_window)
                if not np.any(valid):
                    logger.warning("No complete MA/MSD window in the exposure of %s", window.die)
                    continue
                records.append(
                    MetricRecord(
                        die=window.die,
                        axis=axis,
                        ma_peak=float(np.max(np.abs(ma_window[valid]))),
                        msd_peak=float(np.max(msd_window[valid])),
                    )
                )
        return ExposureMetrics(
            label=trace.label, window_s=window_s, records=records, ma=ma, msd=msd
        )

    def cumulative_psd(self, trace: SimTrace) -> list[CpsCurve]:
        curves = []
        for index, axis in enumerate(trace.axes):
            freq, psd, cumulative = cumulative_psd(
                trace.e[:, index], trace.ts, self.settings.analysis.psd_segment
            )
            curves.append(
                CpsCurve(label=trace.label, axis=axis, freq_hz=freq, psd=psd, cumulative=cumulative)
            )
        return curves
