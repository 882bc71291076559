import logging

import numpy as np
import pytest
from scipy import signal

from src.components.rb_designers.mass_line_pid import MassLinePid, loop_phase_deg, mass_line
from src.control_loops import RigidBodyController
from src.errors import AboveNyquistError
from src.models import FeedforwardDesign, RigidBodyDesign
from src.numerics.filters import discrete_response

TS = 5e-5


def open_loop(pid, f_hz: float) -> complex:
    plant_num, plant_den = mass_line(pid.mass, TS)
    plant = discrete_response(plant_num, plant_den, TS, f_hz)
    return complex(pid.controller.response(np.array([f_hz]))[0] * plant)


class TestPidDesign:
    def test_crossover_at_the_bandwidth(self):
        pid = MassLinePid.design_pid(50.0, TS, 1.0)
        assert abs(open_loop(pid, 50.0)) == pytest.approx(1.0, rel=1e-9)
        assert pid.crossover_gain == pytest.approx(1.0, rel=1e-9)
        assert pid.phase_margin_deg >= 30.0
        assert abs(open_loop(pid, 1.0)) > 100.0

    def test_gain_scales_with_mass(self):
        light = MassLinePid.design_pid(100.0, TS, 1.0)
        heavy = MassLinePid.design_pid(100.0, TS, 4.0)
        assert heavy.gain == pytest.approx(4.0 * light.gain, rel=1e-12)
        assert heavy.phase_margin_deg == pytest.approx(light.phase_margin_deg)

    def test_parallel_form_gains(self):
        pid = MassLinePid.design_pid(100.0, TS, 1.0)
        w_bw = 2 * np.pi * 100.0
        assert pid.k_i == pytest.approx(pid.gain * w_bw / 5)
        assert pid.k_d == pytest.approx(pid.gain * 3 / w_bw)
        assert pid.f_lp_hz == pytest.approx(600.0)

    def test_phase_margin_reads_the_crossover_phase(self):
        pid = MassLinePid.design_pid(100.0, TS, 1.0)
        phase = np.degrees(np.angle(open_loop(pid, 100.0)))
        assert pid.phase_margin_deg == pytest.approx(180.0 + phase, abs=1e-6)

    def test_loop_phase_below_minus_180_is_not_wrapped(self):
        num, den = mass_line(1.0, TS)
        delayed = np.polymul(den, np.r_[1.0, np.zeros(20)])
        theta = np.degrees(2 * np.pi * 1000.0 * TS)
        phase = loop_phase_deg(num, delayed, TS, 1000.0, -180.0)
        assert phase == pytest.approx(-180.0 - 20.5 * theta, abs=1e-6)
        assert phase < -360.0

    @pytest.mark.parametrize("f_bw_hz, mass", [(0.0, 1.0), (-10.0, 1.0), (50.0, 0.0)])
    def test_invalid_arguments(self, f_bw_hz, mass):
        with pytest.raises(ValueError):
            MassLinePid.design_pid(f_bw_hz, TS, mass)

    def test_low_pass_above_nyquist(self):
        with pytest.raises(AboveNyquistError):
            MassLinePid.design_pid(2000.0, TS, 1.0)

    def test_default_axes(self, design_data):
        design = design_data.rb_design
        assert design.axes == ["x", "y", "rz"]
        assert [pid.f_bw_hz for pid in design.pid] == [100.0, 100.0, 80.0]
        for pid in design.pid:
            assert pid.phase_margin_deg >= 30.0

    def test_bandwidth_close_to_the_resonance_warns(self, settings, design_data, caplog):
        fast = settings.model_copy(deep=True)
        fast.rb_control.axes["x"].f_bw_hz = 150.0
        with caplog.at_level(logging.WARNING):
            MassLinePid(fast).run(design_data.decoupled)
        assert "exceeds first resonance" in caplog.text

    def test_axis_count_must_match_the_plant(self, settings, two_mass_data):
        with pytest.raises(ValueError):
            MassLinePid(settings).run(two_mass_data.decoupled)


class TestRigidBodyController:
    @pytest.fixture
    def design(self) -> RigidBodyDesign:
        return RigidBodyDesign(
            axes=["x", "y"],
            pid=[MassLinePid.design_pid(100.0, TS, 1.0), MassLinePid.design_pid(80.0, TS, 2.0)],
            feedforward=[
                FeedforwardDesign(mass=1.0, snap_gain=1e-6),
                FeedforwardDesign(mass=2.0, enabled=False),
            ],
            ts=TS,
        )

    def test_feedback_matches_transfer_function(self, design):
        controller = RigidBodyController(design)
        error = np.random.default_rng(0).normal(scale=1e-6, size=(500, 2))
        out = np.array([controller.step(e) for e in error])
        for axis, pid in enumerate(design.pid):
            expected = signal.lfilter(pid.controller.num, pid.controller.den, error[:, axis])
            scale = np.max(np.abs(expected))
            np.testing.assert_allclose(out[:, axis], expected, rtol=1e-8, atol=1e-10 * scale)

    def test_feedforward(self, design):
        controller = RigidBodyController(design)
        command = controller.feedforward(np.array([10.0, 10.0]), np.array([1e5, 1e5]))
        np.testing.assert_allclose(command, [10.0 + 0.1, 0.0])
        np.testing.assert_allclose(controller.feedforward(np.array([-3.0, 5.0])), [-3.0, 0.0])

    def test_reset(self, design):
        controller = RigidBodyController(design)
        controller.step(np.array([1.0, 1.0]))
        controller.reset()
        assert not np.any(controller.step(np.zeros(2)))
