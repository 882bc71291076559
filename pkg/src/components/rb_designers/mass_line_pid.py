import logging

import numpy as np

from src.components.rb_designers.base_rb_designer import BaseRbDesigner
from src.errors import UnstableLoopError
from src.models import (
    DecoupledPlant,
    DiscreteFilter,
    FeedforwardDesign,
    PidAxisDesign,
    RigidBodyDesign,
)
from src.numerics.filters import (
    bilinear,
    check_below_nyquist,
    discrete_response,
    is_stable,
    lead_lag_pid,
)

logger = logging.getLogger(__name__)


def mass_line(mass: float, ts: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold equivalent of 1 / (m s^2)."""
    return np.array([ts**2 / (2 * mass), ts**2 / (2 * mass)]), np.array([1.0, -2.0, 1.0])


def loop_phase_deg(
    num: np.ndarray, den: np.ndarray, ts: float, f_hz: float, low_frequency_deg: float
) -> float:
    """
    Continuous phase of a discrete loop at f_hz, unwrapped along a sweep from f_hz / 1000.

    The sweep is anchored to the loop's low-frequency asymptote, so phases below -180 deg are
    reported as such instead of wrapping to positive values.
    """
    sweep = np.geomspace(f_hz / 1000.0, f_hz, 400)
    phase = np.degrees(np.unwrap(np.angle(discrete_response(num, den, ts, sweep))))
    phase -= 360.0 * np.round((phase[0] - low_frequency_deg) / 360.0)
    return float(phase[-1])


class MassLinePid(BaseRbDesigner):
    """One PID per decoupled rigid-body axis, tuned on a pure mass line, plus feedforward."""

    def run(self, plant: DecoupledPlant) -> RigidBodyDesign:
        axes = self.settings.rb_control.axes
        if len(axes) != plant.n_rb:
            raise ValueError(
                f"{len(axes)} rigid-body axes configured, plant has {plant.n_rb} rigid-body modes"
            )
        ts = self.settings.observer.ts
        ratio = self.settings.rb_control.resonance_ratio
        limit_hz = float(np.min(plant.omega_fm)) / (2 * np.pi) / ratio
        pid, feedforward = [], []
        for name, axis in axes.items():
            if axis.f_bw_hz > limit_hz:
                logger.warning(
                    "Axis %s bandwidth %.4g Hz exceeds first resonance / %.3g = %.4g Hz",
                    name,
                    axis.f_bw_hz,
                    ratio,
                    limit_hz,
                )
            pid.append(self.design_pid(axis.f_bw_hz, ts, axis.mass))
            feedforward.append(
                FeedforwardDesign(
                    mass=axis.mass, enabled=axis.feedforward, snap_gain=axis.snap_gain
                )
            )
        return RigidBodyDesign(axes=list(axes), pid=pid, feedforward=feedforward, ts=ts)

    @staticmethod
    def design_pid(f_bw_hz: float, ts: float, mass: float) -> PidAxisDesign:
        """
        Scale the lead-lag PID shape so the open loop crosses 0 dB at f_bw.

        Args:
            f_bw_hz (float): Target bandwidth (Hz).
            ts (float): Controller sampling time (s).
            mass (float): Axis mass in decoupled coordinates (kg).

        Returns:
            PidAxisDesign: Discrete controller with its parallel-form gains and margins.
        """
        if f_bw_hz <= 0 or mass <= 0:
            raise ValueError(f"Bandwidth and mass must be positive, got {f_bw_hz} Hz, {mass} kg")
        num, den, corners = lead_lag_pid(f_bw_hz)
        check_below_nyquist(corners["w_lp"], ts, "PID low-pass corner")
        num_d, den_d = bilinear(num, den, ts)
        plant_num, plant_den = mass_line(mass, ts)

        loop_num = np.polymul(num_d, plant_num)
        loop_den = np.polymul(den_d, plant_den)
        unit_loop = discrete_response(loop_num, loop_den, ts, f_bw_hz)
        gain = 1.0 / abs(complex(unit_loop))
        controller = DiscreteFilter(num=gain * num_d, den=den_d, ts=ts)

        closed = np.polyadd(np.polymul(den_d, plant_den), np.polymul(gain * num_d, plant_num))
        if not is_stable(closed):
            raise UnstableLoopError(f"PID loop at {f_bw_hz} Hz is unstable for Ts={ts}")

        loop = gain * complex(unit_loop)
        # integrator on a mass line: -270 deg at low frequencies
        phase_margin = 180.0 + loop_phase_deg(loop_num, loop_den, ts, f_bw_hz, -270.0)
        k_p = gain * (1 + corners["w_i"] / corners["w_z"])
        k_i = gain * corners["w_i"]
        k_d = gain / corners["w_z"]
        logger.info("PID at %.4g Hz: phase margin %.1f deg", f_bw_hz, phase_margin)
        return PidAxisDesign(
            f_bw_hz=f_bw_hz,
            mass=mass,
            gain=gain,
            k_p=k_p,
            k_i=k_i,
            k_d=k_d,
            f_lp_hz=corners["w_lp"] / (2 * np.pi),
            controller=controller,
            crossover_gain=abs(loop),
            phase_margin_deg=float(phase_margin),
        )
