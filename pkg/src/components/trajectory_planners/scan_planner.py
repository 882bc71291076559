import logging
from typing import Callable, Optional

import numpy as np

from src.components.trajectory_planners.base_trajectory_planner import BaseTrajectoryPlanner
from src.models import MotionLimits, ReferenceTrace, ScanLine, ScanWindow
from src.numerics.profiles import held_snap_integrate, plan_axis
from src.resources.layouts import five_die_surrogate

logger = logging.getLogger(__name__)

# Planar axes and the ScanLine coordinate each one follows
PLANAR_AXES = {"x": 0, "y": 1}


class _Segment:
    """Samples of one move or hold; its last row is the first row of the next segment."""

    def __init__(self, states: np.ndarray, plateau: Optional[tuple[int, int]] = None):
        self.states = states
        self.plateau = plateau


class ScanPlanner(BaseTrajectoryPlanner):
    """
    Builds scan sequences from a layout of exposure lines.

    Starting at the workspace center, every line gets a positioning move to its start, a settle
    hold, the scan move itself and another settle hold. Each planar axis is planned with its own
    4th-order profile; the shorter axis holds its target until the longer one finishes.
    """

    def __init__(self, settings, layout: Callable = five_die_surrogate):
        super().__init__(settings)
        self.layout = layout
        self.axes = list(settings.rb_control.axes)
        self.ts = settings.observer.ts

    def limits(self) -> dict[str, MotionLimits]:
        return {
            axis: MotionLimits(**cfg.model_dump())
            for axis, cfg in self.settings.trajectory.limits.items()
            if axis in PLANAR_AXES
        }

    def run(self) -> ReferenceTrace:
        lines = self.layout(self.settings)
        return self.scan_sequence(lines, self.limits(), self.ts)

    def plan_move(
        self,
        start: tuple[float, float],
        end: tuple[float, float],
        limits: dict[str, MotionLimits],
        ts: float,
    ) -> ReferenceTrace:
        """
        Synchronized point-to-point move of the planar axes.

        Args:
            start (tuple[float, float]): Start position (x, y) in m.
            end (tuple[float, float]): Target position (x, y) in m.
            limits (dict[str, MotionLimits]): Limits per planar axis.
            ts (float): Sampling time (s).

        Returns:
            ReferenceTrace: Position through snap for every rigid-body axis.
        """
        segment = self._move(start, end, limits, ts)
        return self._assemble([segment], ts, windows=[])

    def scan_sequence(
        self, lines: list[ScanLine], limits: dict[str, MotionLimits], ts: float
    ) -> ReferenceTrace:
        """
        Concatenated moves over a layout, with constant-velocity and exposure windows per line.

        Args:
            lines (list[ScanLine]): Exposure lines in scan order.
            limits (dict[str, MotionLimits]): Limits per planar axis.
            ts (float): Sampling time (s).

        Returns:
            ReferenceTrace: The full sequence with one window per line.
        """
        if not lines:
            raise ValueError("Scan layout is empty")
        cfg = self.settings.trajectory
        settle = int(round(cfg.settle_s / ts))
        guard = int(round(cfg.guard_s / ts))
        center = self.settings.workspace.rect().center
        position = (center.q_x, center.q_y)

        segments: list[_Segment] = []
        scans: list[tuple[int, ScanLine, str]] = []
        for line in lines:
            if position != line.start:
                segments.append(self._move(position, line.start, limits, ts))
                segments.append(self._hold(segments[-1], settle))
            delta = np.subtract(line.end, line.start)
            axis = "x" if abs(delta[0]) >= abs(delta[1]) else "y"
            scans.append((len(segments), line, axis))
            segments.append(self._move(line.start, line.end, limits, ts))
            segments.append(self._hold(segments[-1], settle))
            position = line.end

        offsets = np.cumsum([0] + [len(s.states) - 1 for s in segments])
        windows = []
        for index, line, axis in scans:
            lo, hi = segments[index].plateau
            cv_start, cv_stop = int(offsets[index] + lo), int(offsets[index] + hi)
            exposure_start = cv_start + guard
            exposure_stop = max(cv_stop - guard, exposure_start)
            if exposure_stop == exposure_start:
                logger.warning("Exposure window of %s is empty after the guard time", line.die)
            windows.append(
                ScanWindow(
                    die=line.die or f"line{len(windows) + 1}",
                    axis=axis,
                    cv_start=cv_start,
                    cv_stop=cv_stop,
                    exposure_start=exposure_start,
                    exposure_stop=exposure_stop,
                )
            )
        trace = self._assemble(segments, ts, windows)
        logger.info(
            "Planned %d scan lines: %d samples (%.3f s)",
            len(lines),
            trace.n_samples,
            trace.duration,
        )
        return trace

    def _move(
        self,
        start: tuple[float, float],
        end: tuple[float, float],
        limits: dict[str, MotionLimits],
        ts: float,
    ) -> _Segment:
        per_axis, plateaus = {}, {}
        for axis, coordinate in PLANAR_AXES.items():
            distance = end[coordinate] - start[coordinate]
            if distance != 0 and axis not in limits:
                raise ValueError(f"No motion limits configured for axis {axis}")
            profile = plan_axis(distance, limits[axis], ts) if distance != 0 else None
            snap = profile.snap if profile is not None else np.zeros(0)
            states = held_snap_integrate(snap, ts, np.array([start[coordinate], 0.0, 0.0, 0.0]))
            states[-1] = [end[coordinate], 0.0, 0.0, 0.0]
            per_axis[axis] = np.column_stack([states, np.append(snap, 0.0)])
            plateaus[axis] = (abs(distance), profile.plateau if profile is not None else (0, 0))

        n = max(len(block) for block in per_axis.values())
        states = np.zeros((n, len(self.axes), 5))
        for axis, block in per_axis.items():
            hold = np.tile([block[-1, 0], 0.0, 0.0, 0.0, 0.0], (n - len(block), 1))
            padded = np.vstack([block, hold])
            states[:, self.axes.index(axis)] = padded
        dominant = max(plateaus, key=lambda axis: plateaus[axis][0])
        return _Segment(states, plateaus[dominant][1])

    @staticmethod
    def _hold(previous: _Segment, samples: int) -> _Segment:
        last = previous.states[-1].copy()
        last[:, 1:] = 0.0
        return _Segment(np.repeat(last[None], samples + 1, axis=0))

    def _assemble(
        self, segments: list[_Segment], ts: float, windows: list[ScanWindow]
    ) -> ReferenceTrace:
        blocks = [s.states[:-1] for s in segments[:-1]] + [segments[-1].states]
        states = np.concatenate(blocks)
        boundaries = np.cumsum([0] + [len(s.states) - 1 for s in segments]).tolist()
        return ReferenceTrace(
            axes=self.axes,
            ts=ts,
            position=states[:, :, 0],
            velocity=states[:, :, 1],
            acceleration=states[:, :, 2],
            jerk=states[:, :, 3],
            snap=states[:, :, 4],
            segments=[int(b) for b in boundaries],
            windows=windows,
        )
