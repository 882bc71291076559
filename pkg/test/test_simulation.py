import numpy as np
import pytest
from scipy import signal

from cli.controller import Controller
from src.components.flex_designers.modal_feedback_designer import ModalFeedbackDesigner
from src.components.simulators.closed_loop_simulator import ClosedLoopSimulator
from src.components.simulators.training_simulator import TrainingSimulator
from src.components.trajectory_planners.scan_planner import ScanPlanner
from src.errors import TsMismatchError, UnstableLoopError
from src.interconnection import frozen_loop, loop_spectral_radius
from src.models import FlexGains, PositionPolynomial

TS = 5e-5
OMEGA = 2 * np.pi * 1050.0


@pytest.fixture(scope="module")
def short_reference(settings):
    planner = ScanPlanner(settings)
    return planner.plan_move((0.0, 0.0), (0.02, 0.0), planner.limits(), TS)


def fitted_damping(trace, start_s: float, stop_s: float) -> float:
    """Damping ratio of the first flexible mode from the decay of its energy envelope."""
    position, velocity = trace.modal[:, 6], trace.modal[:, 7]
    amplitude = 0.5 * np.log(position**2 + (velocity / OMEGA) ** 2)
    t = trace.t
    mask = (t >= start_s) & (t <= stop_s)
    slope = np.polyfit(t[mask], amplitude[mask], 1)[0]
    return -slope / OMEGA


class TestClosedLoop:
    def test_zero_reference_without_noise_stays_at_rest(
        self, quiet_settings, loop_design, still_reference
    ):
        reference = still_reference(["x", "y", "rz"], TS, 200)
        trace = ClosedLoopSimulator(quiet_settings, flex="on").simulate(
            loop_design, reference, "rest", True
        )
        for name in ("y", "e", "u_rb", "u_fm", "modal", "q_hat"):
            assert not np.any(getattr(trace, name)), name

    def test_repeat_runs_are_identical(self, settings, loop_design, short_reference):
        simulator = ClosedLoopSimulator(settings, flex="on")
        first = simulator.simulate(loop_design, short_reference, "a", True)
        second = simulator.simulate(loop_design, short_reference, "a", True)
        assert np.array_equal(first.e, second.e)
        assert np.array_equal(first.modal, second.modal)

    def test_ab_runs_share_noise(self, settings, loop_design, short_reference):
        baseline, extended = ClosedLoopSimulator(settings).ab_compare(loop_design, short_reference)
        assert (baseline.label, extended.label) == ("baseline", "extended")
        assert not baseline.flex_enabled and extended.flex_enabled
        assert np.array_equal(baseline.sensor_noise, extended.sensor_noise)
        assert np.array_equal(baseline.force_noise, extended.force_noise)
        assert not np.any(baseline.u_fm)
        assert np.any(extended.u_fm)
        np.testing.assert_array_equal(baseline.reference, short_reference.position)

    def test_tracking_follows_the_move(self, quiet_settings, loop_design, short_reference):
        trace = ClosedLoopSimulator(quiet_settings, flex="on").simulate(
            loop_design, short_reference, "move", True
        )
        assert np.max(np.abs(trace.e[:, 0])) < 1e-3
        assert trace.y[-1, 0] == pytest.approx(0.02, abs=1e-4)

    def test_plant_stepping_matches_oversampled_integration(
        self, settings, loop_design, short_reference
    ):
        trace = ClosedLoopSimulator(settings, flex="on").simulate(
            loop_design, short_reference, "exact", True
        )
        plant = loop_design.plant
        inputs = np.hstack([plant.b(), plant.b_physical()])
        n = plant.n_states
        fine_a, fine_b, *_ = signal.cont2discrete(
            (plant.a(), inputs, np.eye(n), np.zeros((n, inputs.shape[1]))),
            TS / 10,
            method="zoh",
        )
        held = np.hstack([trace.u_tilde, trace.force_noise])
        states = np.zeros_like(trace.modal)
        states[0] = x = trace.modal[0]
        for k in range(trace.n_samples - 1):
            for _ in range(10):
                x = fine_a @ x + fine_b @ held[k]
            states[k + 1] = x
        scale = np.abs(trace.modal).max(axis=0)
        assert np.all(scale > 0)
        assert np.all(np.abs(states - trace.modal).max(axis=0) <= 1e-9 * scale)

    def test_flexible_mode_without_readout_leaves_the_run_unchanged(
        self, settings, design_data, loop_design, short_reference
    ):
        plant = loop_design.plant
        blind = plant.model_copy(
            update={
                "c_fm_raw": PositionPolynomial(
                    coefficients=np.zeros_like(plant.c_fm_raw.coefficients),
                    workspace=plant.workspace,
                )
            }
        )
        gains, bandpass = ModalFeedbackDesigner(settings).run(blind, design_data.truncated)
        design = loop_design._replace(plant=blind, gains=gains, bandpass=bandpass)
        baseline, extended = ClosedLoopSimulator(settings).ab_compare(design, short_reference)
        # the bank still predicts the mode from the input it is fed
        assert np.any(extended.q_hat[:, 6:8])
        assert not np.any(extended.u_fm)
        for name in ("y", "e", "u_rb", "u_tilde", "modal"):
            assert np.array_equal(getattr(baseline, name), getattr(extended, name)), name

    def test_sampling_time_mismatch(self, settings, loop_design, short_reference):
        slow = settings.model_copy(deep=True)
        slow.sim.ts = 1e-4
        with pytest.raises(TsMismatchError):
            ClosedLoopSimulator(slow).simulate(loop_design, short_reference, "x", False)

    def test_sensor_noise_must_match_the_outputs(self, settings, loop_design, short_reference):
        odd = settings.model_copy(deep=True)
        odd.noise.sensor_std = [1e-9]
        with pytest.raises(ValueError):
            ClosedLoopSimulator(odd).simulate(loop_design, short_reference, "x", False)

    def test_measured_scheduling(self, settings, loop_design, short_reference):
        measured = settings.model_copy(deep=True)
        measured.observer.scheduling = "measured"
        trace = ClosedLoopSimulator(measured, flex="on").simulate(
            loop_design, short_reference, "measured", True
        )
        np.testing.assert_allclose(trace.p[1:, 0], trace.y[:-1, 0])

    def test_recorded_predictions_replay(self, settings, loop_design, short_reference):
        trace = ClosedLoopSimulator(settings).simulate(
            loop_design, short_reference, "rec", True, record_local=True
        )
        replayed = loop_design.bank.replay(trace.u_tilde, trace.y)
        scale = np.max(np.abs(trace.local))
        np.testing.assert_allclose(replayed, trace.local, rtol=1e-9, atol=1e-12 * scale)


class TestStability:
    def test_frozen_loops_are_stable(self, settings, loop_design):
        for p in loop_design.bank.points:
            for enabled in (False, True):
                system = frozen_loop(loop_design, p, enabled, rb_closed=True)
                assert loop_spectral_radius(system) < 1.0
        ClosedLoopSimulator(settings).check_stability(loop_design, True)

    def test_destabilizing_gains_are_rejected(self, settings, loop_design):
        gains = loop_design.gains
        wrong = FlexGains(controlled=gains.controlled, k_s=gains.k_s, k_d=-10 * gains.k_d)
        with pytest.raises(UnstableLoopError) as info:
            ClosedLoopSimulator(settings).check_stability(loop_design._replace(gains=wrong), True)
        assert info.value.point is not None

    def test_flexible_loop_adds_damping(self, quiet_settings, loop_design, still_reference):
        quiet_settings.sim.initial_state = [0.0] * 6 + [1e-9, 0.0, 0.0, 0.0]
        reference = still_reference(["x", "y", "rz"], TS, 800)
        simulator = ClosedLoopSimulator(quiet_settings)
        baseline, extended = simulator.ab_compare(loop_design, reference)
        zeta_off = fitted_damping(baseline, 0.002, 0.038)
        zeta_on = fitted_damping(extended, 0.002, 0.038)
        assert 0.006 <= zeta_on <= 0.012
        assert zeta_on > 3 * zeta_off


class TestTrainingRun:
    def test_training_trace_records_local_predictions(
        self, settings, loop_design, short_reference
    ):
        trace = TrainingSimulator(settings).run(loop_design, short_reference)
        assert trace.label == "training"
        assert not trace.flex_enabled
        assert trace.local.shape == (short_reference.n_samples, 9, 8)


@pytest.mark.asyncio
async def test_parallel_ab_runs_match_sequential(settings, design_data, short_reference):
    data = design_data.model_copy()
    data.reference = short_reference
    simulator = ClosedLoopSimulator(settings)
    baseline, extended = await Controller.simulate_ab(simulator, data)
    design, _ = simulator.extract_input(data)
    sequential = simulator.ab_compare(design, short_reference)
    assert np.array_equal(baseline.e, sequential[0].e)
    assert np.array_equal(extended.e, sequential[1].e)
