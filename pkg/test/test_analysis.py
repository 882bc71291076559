import control
import numpy as np
import pytest

from cli.utilities import comparison_table
from src.components.evaluators.exposure_evaluator import ExposureEvaluator, mode_step_reduction_db
from src.components.evaluators.frf_evaluator import FrfEvaluator
from src.components.rb_designers.mass_line_pid import mass_line
from src.errors import AboveNyquistError
from src.interconnection import frozen_loop
from src.models import Data, ScanWindow
from src.numerics.filters import discrete_response
from src.numerics.spectral import ma_msd

TS = 5e-5
AMPLITUDE = 1e-6
N_SAMPLES = 4096
WINDOWS = [
    ScanWindow(
        die="die1", axis="x", cv_start=200, cv_stop=1800, exposure_start=300, exposure_stop=1700
    ),
    ScanWindow(
        die="die2", axis="x", cv_start=2200, cv_stop=3800, exposure_start=2300, exposure_stop=3700
    ),
]


def sinusoid(amplitude: float, f_hz: float = 1000.0) -> np.ndarray:
    return amplitude * np.sin(2 * np.pi * f_hz * np.arange(N_SAMPLES) * TS)


@pytest.fixture(scope="module")
def frf_data(settings, design_data) -> Data:
    return FrfEvaluator(settings).process(design_data.model_copy())


class TestFrf:
    def test_two_responses_per_grid_point(self, frf_data):
        assert len(frf_data.frfs) == 18
        assert len(frf_data.suppression_db) == 9
        assert [frf.flex_enabled for frf in frf_data.frfs[:2]] == [False, True]

    def test_low_frequencies_follow_the_mass_line(self, frf_data):
        num, den = mass_line(1.0, TS)
        for frf in frf_data.frfs:
            if frf.flex_enabled:
                continue
            low = frf.freq_hz <= 50.0
            assert np.count_nonzero(low) > 10
            expected = np.array(
                [complex(discrete_response(num, den, TS, f)) for f in frf.freq_hz[low]]
            )
            np.testing.assert_allclose(frf.channel(0, 0)[low], expected, rtol=1e-3)

    def test_resonance_peak_without_the_flexible_loop(self, frf_data):
        for frf in frf_data.frfs:
            if frf.flex_enabled:
                continue
            band = (frf.freq_hz >= 900.0) & (frf.freq_hz <= 1250.0)
            magnitude = np.abs(frf.channel(0, 0)[band])
            assert frf.freq_hz[band][np.argmax(magnitude)] == pytest.approx(1050.0, rel=5e-3)

    def test_suppression_is_uniform_over_the_workspace(self, frf_data):
        # damping raised from 0.001 to 0.008: 20 log10(8) dB
        suppression = np.array(frf_data.suppression_db)
        assert np.all(np.abs(suppression - 18.06) <= 1.5)
        assert np.ptp(suppression) < 2.0

    def test_suppression_at_the_workspace_center(self, frf_data):
        points = np.array([frf.point.as_tuple() for frf in frf_data.frfs[::2]])
        center = int(np.argmin(np.linalg.norm(points, axis=1)))
        assert frf_data.suppression_db[center] == pytest.approx(18.06, abs=1.0)

    @pytest.mark.parametrize("f_hz", [300.0, 1050.0, 1500.0])
    def test_response_matches_a_simulated_sine(self, settings, design_data, f_hz):
        evaluator = FrfEvaluator(settings)
        design, points = evaluator.extract_input(design_data)
        p = points[4]
        _, on, _ = evaluator.equivalent_mechanics_frf(design, p, np.array([f_hz]))
        expected = on.channel(0, 0)[np.flatnonzero(on.freq_hz == f_hz)[0]]

        system = frozen_loop(design, p, True, rb_closed=False)
        k = np.arange(160000)
        u = np.zeros((system.ninputs, k.size))
        u[0] = np.sin(2 * np.pi * f_hz * k * TS)
        y = control.forced_response(system, None, u, squeeze=False).outputs[0]

        # steady state plus the free rigid-body drift
        tail = k >= 80000
        phase = 2 * np.pi * f_hz * k[tail] * TS
        basis = np.column_stack([np.sin(phase), np.cos(phase), np.ones(tail.sum()), k[tail]])
        coefficients = np.linalg.lstsq(basis, y[tail], rcond=None)[0]
        measured = complex(coefficients[0], coefficients[1])
        assert abs(measured) == pytest.approx(abs(expected), rel=0.01)
        assert abs(np.degrees(np.angle(measured / expected))) <= 1.0

    def test_explicit_points(self, settings, design_data):
        listed = settings.model_copy(deep=True)
        listed.analysis.frf_points = [(0.0, 0.0), (0.15, -0.15)]
        listed.analysis.n_points = 20
        data = FrfEvaluator(listed).process(design_data.model_copy())
        assert len(data.suppression_db) == 2
        assert data.frfs[2].point.as_tuple() == (0.15, -0.15)

    def test_list_mode_needs_points(self, settings, design_data):
        with pytest.raises(ValueError):
            FrfEvaluator(settings, points="list").process(design_data.model_copy())

    def test_grid_must_stay_below_nyquist(self, settings):
        wide = settings.model_copy(deep=True)
        wide.analysis.f_max_hz = 12000.0
        with pytest.raises(AboveNyquistError):
            FrfEvaluator(wide).frequency_grid(TS)


class TestExposureMetrics:
    def test_sinusoid_and_offset(self, settings, make_trace):
        e = np.column_stack([sinusoid(AMPLITUDE), np.full(N_SAMPLES, 2e-6), np.zeros(N_SAMPLES)])
        metrics = ExposureEvaluator(settings).exposure_metrics(make_trace("a", e, WINDOWS))
        assert len(metrics.records) == 6
        by_axis = {(r.die, r.axis): r for r in metrics.records}
        for die in ("die1", "die2"):
            x, y, rz = by_axis[(die, "x")], by_axis[(die, "y")], by_axis[(die, "rz")]
            assert x.msd_peak == pytest.approx(AMPLITUDE / np.sqrt(2), rel=1e-6)
            assert x.ma_peak < 1e-12 * AMPLITUDE
            assert y.ma_peak == pytest.approx(2e-6, rel=1e-12)
            assert y.msd_peak < 1e-15
            assert rz.ma_peak == 0.0 and rz.msd_peak == 0.0
        assert metrics.peak_msd("x") == pytest.approx(AMPLITUDE / np.sqrt(2), rel=1e-6)
        assert metrics.ma.shape == e.shape

    def test_window_without_complete_average_is_skipped(self, settings, make_trace, caplog):
        edge = ScanWindow(
            die="edge", axis="x", cv_start=0, cv_stop=40, exposure_start=0, exposure_stop=40
        )
        e = np.column_stack([sinusoid(AMPLITUDE)] * 3)
        metrics = ExposureEvaluator(settings).exposure_metrics(make_trace("a", e, [edge]))
        assert metrics.records == []
        assert "No complete MA/MSD window" in caplog.text

    def test_cumulative_psd(self, settings, make_trace):
        e = np.column_stack([sinusoid(AMPLITUDE)] * 3)
        curves = ExposureEvaluator(settings).cumulative_psd(make_trace("a", e, WINDOWS))
        assert [curve.axis for curve in curves] == ["x", "y", "rz"]
        for curve in curves:
            assert curve.cumulative[-1] == pytest.approx(AMPLITUDE**2 / 2, rel=0.05)
            assert curve.band_step((900.0, 1250.0)) == pytest.approx(
                curve.cumulative[-1], rel=0.05
            )

    def test_moving_statistics_commute_with_a_shift(self, settings):
        rng = np.random.default_rng(3)
        e = rng.standard_normal((3000, 2))
        shift = 137
        ma, msd = ma_msd(e, TS, settings.analysis.window_s)
        ma_shifted, msd_shifted = ma_msd(e[shift:], TS, settings.analysis.window_s)
        for full, shifted in ((ma[shift:], ma_shifted), (msd[shift:], msd_shifted)):
            both = np.isfinite(full) & np.isfinite(shifted)
            assert np.count_nonzero(both) > 2000
            np.testing.assert_allclose(shifted[both], full[both], rtol=1e-12, atol=1e-15)

    def test_white_noise_power_is_kept(self, settings, make_trace):
        rng = np.random.default_rng(4)
        e = AMPLITUDE * rng.standard_normal((65536, 3))
        curves = ExposureEvaluator(settings).cumulative_psd(make_trace("a", e, WINDOWS))
        for index, curve in enumerate(curves):
            assert np.all(np.diff(curve.cumulative) >= 0.0)
            assert curve.cumulative[-1] == pytest.approx(np.var(e[:, index]), rel=0.05)

    def test_mode_step_reduction(self, settings, make_trace):
        evaluator = ExposureEvaluator(settings)
        loud = evaluator.cumulative_psd(
            make_trace("baseline", np.column_stack([sinusoid(AMPLITUDE)] * 3), WINDOWS)
        )
        quiet = evaluator.cumulative_psd(
            make_trace("extended", np.column_stack([sinusoid(AMPLITUDE / 10)] * 3), WINDOWS)
        )
        reduction = mode_step_reduction_db(loud[0], quiet[0], (900.0, 1250.0))
        assert reduction == pytest.approx(20.0, rel=1e-9)

    def test_process_fills_metrics_and_curves(self, settings, make_trace):
        data = Data()
        for label, scale in (("baseline", 1.0), ("extended", 0.5)):
            e = np.column_stack([sinusoid(scale * AMPLITUDE)] * 3)
            data.traces[label] = make_trace(label, e, WINDOWS)
        data = ExposureEvaluator(settings).process(data)
        assert set(data.metrics) == {"baseline", "extended"}
        assert len(data.cps["extended"]) == 3

        table = comparison_table(data.metrics, data.cps, (900.0, 1250.0))
        assert len(table) == 6
        np.testing.assert_allclose(table["msd_ratio"], 0.5, rtol=1e-6)
        np.testing.assert_allclose(table["cps_step_reduction_db"], 20 * np.log10(2), rtol=1e-9)

    def test_comparison_needs_both_runs(self, settings, make_trace):
        data = Data()
        data.traces["baseline"] = make_trace(
            "baseline", np.column_stack([sinusoid(AMPLITUDE)] * 3), WINDOWS
        )
        data = ExposureEvaluator(settings).process(data)
        assert comparison_table(data.metrics).empty

    def test_traces_are_required(self, settings):
        with pytest.raises(ValueError):
            ExposureEvaluator(settings).process(Data())
