import logging
from typing import Optional

import numpy as np

from src.components.simulators.base_simulator import BaseSimulator
from src.control_loops import FlexModeController, RigidBodyController
from src.errors import NonFiniteStateError, TsMismatchError, UnstableLoopError
from src.interconnection import LoopDesign, combine_predictions, frozen_loop, loop_spectral_radius
from src.models import Data, ReferenceTrace, SchedulingPoint, SimTrace
from src.numerics.discretization import zoh_discretize

logger = logging.getLogger(__name__)


class ClosedLoopSimulator(BaseSimulator):
    """
    Runs the rigid-body loop with or without the scheduled flexible-mode loop.

    Per tick: reference and scheduling point, measurement, PID plus feedforward, flexible-mode
    command from the previous estimate, observer bank step, combination, exact ZOH plant step.
    """

    def __init__(self, settings, flex: Optional[str] = None):
        super().__init__(settings)
        self.flex = flex or settings.sim.flex

    def run(self, design: LoopDesign, reference: ReferenceTrace) -> dict[str, SimTrace]:
        if self.flex == "ab":
            baseline, extended = self.ab_compare(design, reference)
            return {"baseline": baseline, "extended": extended}
        enabled = self.flex == "on"
        label = "extended" if enabled else "baseline"
        self.check_stability(design, enabled)
        return {label: self.simulate(design, reference, label, enabled)}

    def update_data(self, data: Data, result: dict[str, SimTrace]):
        data.traces.update(result)

    def ab_compare(
        self, design: LoopDesign, reference: ReferenceTrace
    ) -> tuple[SimTrace, SimTrace]:
        """Baseline and extended runs with shared designs and noise realizations."""
        self.check_stability(design, True)
        baseline = self.simulate(design, reference, "baseline", False)
        extended = self.simulate(design, reference, "extended", True)
        return baseline, extended

    def check_ts(self, design: LoopDesign, reference: ReferenceTrace):
        ts = self.settings.sim.ts
        sources = {
            "observer bank": design.bank.ts,
            "rigid-body design": design.rb_design.ts,
            "band-pass": design.bandpass.ts,
            "reference": reference.ts,
        }
        for name, value in sources.items():
            if not np.isclose(value, ts, rtol=1e-12, atol=0.0):
                raise TsMismatchError(f"Simulation Ts={ts} differs from the {name} Ts={value}")

    def check_stability(self, design: LoopDesign, flex_enabled: bool):
        """Frozen closed loops must be stable at every grid point."""
        for p in design.bank.points:
            for enabled in (False, True) if flex_enabled else (False,):
                radius = loop_spectral_radius(frozen_loop(design, p, enabled, rb_closed=True))
                if radius >= 1.0:
                    loop = "extended" if enabled else "baseline"
                    raise UnstableLoopError(
                        f"The {loop} loop has spectral radius {radius:.6f}", point=p.as_tuple()
                    )

    def draw_noise(self, n_samples: int, n_outputs: int, n_forces: int):
        cfg = self.settings.noise
        if len(cfg.sensor_std) != n_outputs:
            raise ValueError(
                f"noise.sensor_std has {len(cfg.sensor_std)} entries, plant has {n_outputs} outputs"
            )
        rng = np.random.default_rng(self.settings.sim.seed)
        sensor = rng.standard_normal((n_samples, n_outputs)) * np.asarray(cfg.sensor_std)
        force = rng.standard_normal((n_samples, n_forces)) * cfg.force_std
        return sensor, force

    def initial_state(self, n_states: int) -> np.ndarray:
        initial = self.settings.sim.initial_state
        if initial is None:
            return np.zeros(n_states)
        if len(initial) != n_states:
            raise ValueError(f"sim.initial_state needs {n_states} entries, got {len(initial)}")
        return np.asarray(initial, dtype=float)

    def simulate(
        self,
        design: LoopDesign,
        reference: ReferenceTrace,
        label: str,
        flex_enabled: bool,
        record_local: Optional[bool] = None,
    ) -> SimTrace:
        """
        Args:
            design (LoopDesign): Plant, observers, combiner and controllers.
            reference (ReferenceTrace): Reference for every rigid-body axis.
            label (str): Name of the run.
            flex_enabled (bool): Close the flexible-mode loop.
            record_local (bool): Keep every local prediction; defaults to sim.record_local.

        Returns:
            SimTrace: Per-tick record of the run.
        """
        self.check_ts(design, reference)
        record_local = self.settings.sim.record_local if record_local is None else record_local
        plant, bank, scheme = design.plant, design.bank, design.scheme
        ts = self.settings.sim.ts
        a_d, b_d = zoh_discretize(plant.a(), plant.b(), ts)
        _, b_w = zoh_discretize(plant.a(), plant.b_physical(), ts)
        a_z, b_z = bank.stacked()
        rigid = RigidBodyController(design.rb_design)
        flex = FlexModeController(design.gains, design.bandpass, bank.n_rb, bank.keep)

        n_samples, n_y, n_u = reference.n_samples, plant.n_rb, b_d.shape[1]
        if reference.position.shape[1] != n_y:
            raise ValueError(f"Reference has {reference.position.shape[1]} axes, plant has {n_y}")
        sensor, force = self.draw_noise(n_samples, n_y, b_w.shape[1])
        ix, iy = reference.axis("x"), reference.axis("y")
        measured = self.settings.observer.scheduling == "measured"

        x = self.initial_state(a_d.shape[0])
        z = np.zeros(a_z.shape[0])
        q_hat = np.zeros(bank.n_states)
        u_fm = np.zeros(n_u)
        y = np.zeros(n_y)

        rec = {
            name: np.zeros((n_samples, width))
            for name, width in (
                ("p", 2),
                ("y", n_y),
                ("e", n_y),
                ("u_rb", n_u),
                ("u_ff", n_u),
                ("u_fm", n_u),
                ("u_tilde", n_u),
                ("modal", x.size),
                ("q_hat", bank.n_states),
            )
        }
        local_rec = np.zeros((n_samples, bank.n, bank.n_states)) if record_local else None

        for k in range(n_samples):
            r = reference.position[k]
            source = y if measured and k > 0 else r
            p = plant.check_point(SchedulingPoint(q_x=source[ix], q_y=source[iy]))
            rec["modal"][k] = x
            y = plant.c(p) @ x + sensor[k]
            e = r - y
            u_ff = rigid.feedforward(reference.acceleration[k], reference.snap[k])
            u_rb = rigid.step(e) + u_ff
            if flex_enabled:
                u_fm = flex.step(q_hat)
            u = u_rb + u_fm

            z = a_z @ z + b_z @ np.concatenate([u, y])
            local = z.reshape(bank.n, bank.n_states)
            q_hat = combine_predictions(scheme, bank, local, p)

            x = a_d @ x + b_d @ u + b_w @ force[k]
            if not np.all(np.isfinite(x)):
                raise NonFiniteStateError(
                    f"Plant state became non-finite at tick {k} (t={k * ts:.6g} s)",
                    point=p.as_tuple(),
                )
            rec["p"][k] = p.as_tuple()
            rec["y"][k], rec["e"][k] = y, e
            rec["u_rb"][k], rec["u_ff"][k], rec["u_fm"][k], rec["u_tilde"][k] = u_rb, u_ff, u_fm, u
            rec["q_hat"][k] = q_hat
            if local_rec is not None:
                local_rec[k] = local

        peak = np.abs(rec["e"]).max(axis=0) if n_samples else np.zeros(n_y)
        logger.info(
            "Simulated %s run: %d ticks, peak |e| %s",
            label,
            n_samples,
            np.array2string(peak, precision=3),
        )
        return SimTrace(
            label=label,
            flex_enabled=flex_enabled,
            ts=ts,
            axes=reference.axes,
            reference=reference.position,
            sensor_noise=sensor,
            force_noise=force,
            local=local_rec,
            windows=reference.windows,
            **rec,
        )
