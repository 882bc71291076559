import numpy as np
import pytest

from src.components.trajectory_planners.scan_planner import ScanPlanner
from src.errors import InfeasibleLimitsError
from src.models import MotionLimits, ScanLine
from src.numerics.profiles import continuous_durations, held_snap_integrate, plan_axis
from src.resources.layouts import training_raster

TS = 5e-5
X_LIMITS = MotionLimits(v_max=0.8, a_max=35.0, j_max=3500.0, s_max=7e5)
Y_LIMITS = MotionLimits(v_max=0.38, a_max=15.0, j_max=3500.0, s_max=7e5)
SLACK = 1 + 1e-9


@pytest.fixture
def planner(settings) -> ScanPlanner:
    return ScanPlanner(settings)


def assert_within(trace, column: int, limits: MotionLimits):
    assert np.max(np.abs(trace.velocity[:, column])) <= limits.v_max * SLACK
    assert np.max(np.abs(trace.acceleration[:, column])) <= limits.a_max * SLACK
    assert np.max(np.abs(trace.jerk[:, column])) <= limits.j_max * SLACK
    assert np.max(np.abs(trace.snap[:, column])) <= limits.s_max * SLACK


class TestAxisProfile:
    def test_zero_distance(self):
        profile = plan_axis(0.0, X_LIMITS, TS)
        assert profile.snap.size == 0
        assert continuous_durations(0.0, X_LIMITS).total == 0.0

    def test_long_move_reaches_the_velocity_limit(self):
        profile = plan_axis(0.3, X_LIMITS, TS)
        states = held_snap_integrate(profile.snap, TS)
        assert states[-1, 0] == pytest.approx(0.3, rel=1e-9)
        np.testing.assert_allclose(states[-1, 1:], 0.0, atol=1e-9)
        lo, hi = profile.plateau
        plateau = states[lo:hi, 1]
        assert np.ptp(plateau) <= 1e-9 * X_LIMITS.v_max
        assert plateau[0] == pytest.approx(X_LIMITS.v_max, rel=0.01)
        assert plateau[0] <= X_LIMITS.v_max * SLACK

    def test_short_move_has_no_plateau_phase(self):
        durations = continuous_durations(1e-5, X_LIMITS)
        assert durations.t_v <= 1e-12
        profile = plan_axis(-1e-5, X_LIMITS, TS)
        states = held_snap_integrate(profile.snap, TS)
        assert states[-1, 0] == pytest.approx(-1e-5, rel=1e-9)

    def test_limits_hold_after_rounding(self):
        for distance in (1e-4, 3e-3, 0.05, 0.2):
            profile = plan_axis(distance, Y_LIMITS, TS)
            states = held_snap_integrate(profile.snap, TS)
            assert np.max(np.abs(states[:, 1])) <= Y_LIMITS.v_max * SLACK
            assert np.max(np.abs(states[:, 2])) <= Y_LIMITS.a_max * SLACK
            assert np.max(np.abs(states[:, 3])) <= Y_LIMITS.j_max * SLACK
            assert profile.snap_level <= Y_LIMITS.s_max * SLACK

    @pytest.mark.parametrize("limits", [X_LIMITS, Y_LIMITS])
    @pytest.mark.parametrize("distance", [1e-4, 3e-3, 0.05, 0.2])
    def test_doubling_the_snap_limit_never_lengthens_the_move(self, limits, distance):
        faster = limits.model_copy(update={"s_max": 2 * limits.s_max})
        slow, fast = continuous_durations(distance, limits), continuous_durations(distance, faster)
        assert fast.total <= slow.total * (1 + 1e-12)
        samples = [plan_axis(distance, bounds, TS).snap.size for bounds in (limits, faster)]
        assert samples[1] <= samples[0]

    @pytest.mark.parametrize("v_max", [0.0, -1.0, np.inf, np.nan])
    def test_infeasible_limits(self, v_max):
        limits = MotionLimits.model_construct(v_max=v_max, a_max=1.0, j_max=1.0, s_max=1.0)
        with pytest.raises(InfeasibleLimitsError):
            plan_axis(0.1, limits, TS)


class TestPointToPoint:
    def test_zero_move(self, planner):
        trace = planner.plan_move((0.02, 0.0), (0.02, 0.0), planner.limits(), TS)
        assert trace.n_samples == 1
        assert trace.position[0].tolist() == [0.02, 0.0, 0.0]
        assert not np.any(trace.velocity)

    def test_diagonal_move(self, planner):
        trace = planner.plan_move((-0.1, 0.0), (0.1, 0.05), planner.limits(), TS)
        assert trace.axes == ["x", "y", "rz"]
        np.testing.assert_allclose(trace.position[-1], [0.1, 0.05, 0.0], atol=1e-15)
        np.testing.assert_allclose(trace.position[0], [-0.1, 0.0, 0.0], atol=1e-15)
        assert_within(trace, 0, X_LIMITS)
        assert_within(trace, 1, Y_LIMITS)
        assert not np.any(trace.position[:, 2])

        # both axes start together; the shorter one then holds its target
        assert trace.velocity[1, 0] > 0 and trace.velocity[1, 1] > 0
        y_done = np.flatnonzero(trace.velocity[:, 1])[-1] + 1
        assert y_done < trace.n_samples - 1
        np.testing.assert_allclose(trace.position[y_done:, 1], 0.05, atol=1e-12)

    def test_trace_is_continuous(self, planner):
        trace = planner.plan_move((0.0, 0.0), (0.02, 0.0), planner.limits(), TS)
        steps = np.abs(np.diff(trace.position[:, 0]))
        assert np.max(steps) <= X_LIMITS.v_max * TS * SLACK


class TestScanSequence:
    def test_single_line(self, planner, settings):
        line = ScanLine(start=(-0.06, 0.0), end=(0.06, 0.0), die="die1")
        trace = planner.scan_sequence([line], planner.limits(), TS)
        assert len(trace.windows) == 1
        window = trace.windows[0]
        assert window.die == "die1" and window.axis == "x"
        guard = round(settings.trajectory.guard_s / TS)
        assert window.exposure_start == window.cv_start + guard
        assert window.exposure_stop == window.cv_stop - guard
        velocity = trace.velocity[window.cv_start : window.cv_stop, 0]
        assert np.ptp(velocity) <= 1e-9
        assert velocity[0] > 0.7
        assert trace.position[window.cv_start, 0] > -0.06
        assert trace.position[window.cv_stop - 1, 0] < 0.06
        np.testing.assert_allclose(trace.position[-1], [0.06, 0.0, 0.0], atol=1e-15)
        assert trace.segments[0] == 0 and trace.segments[-1] == trace.n_samples - 1

    def test_five_die_layout(self, planner):
        trace = planner.run()
        assert [w.die for w in trace.windows] == [f"die{i}" for i in range(1, 6)]
        directions = []
        for window in trace.windows:
            assert window.axis == "x"
            assert window.contains(window.exposure_start, window.exposure_stop)
            directions.append(np.sign(trace.velocity[window.exposure_start, 0]))
        assert directions == [1.0, -1.0, 1.0, -1.0, 1.0]
        stops = [w.cv_stop for w in trace.windows]
        starts = [w.cv_start for w in trace.windows]
        assert all(stop < start for stop, start in zip(stops, starts[1:]))
        assert not np.any(trace.velocity[-1])
        assert trace.window_mask().sum() == sum(
            w.exposure_stop - w.exposure_start for w in trace.windows
        )

    def test_training_raster(self, settings):
        trace = ScanPlanner(settings, layout=training_raster).run()
        assert len(trace.windows) == settings.weighting.raster_lines
        assert np.max(np.abs(trace.position[:, 0])) <= 0.15
        assert np.max(np.abs(trace.position[:, 1])) <= 0.15

    def test_empty_layout(self, planner):
        with pytest.raises(ValueError):
            planner.scan_sequence([], planner.limits(), TS)
