import asyncio
import logging
import os
import time
from typing import Optional

import numpy as np
import pandas as pd

from cli import utilities
from src.components.evaluators.exposure_evaluator import ExposureEvaluator
from src.components.evaluators.frf_evaluator import FrfEvaluator
from src.components.simulators.base_simulator import BaseSimulator
from src.components.simulators.closed_loop_simulator import ClosedLoopSimulator
from src.components.trajectory_planners.base_trajectory_planner import BaseTrajectoryPlanner
from src.models import Data, DesignFile, SimTrace
from src.pipeline import Pipeline
from src.settings import StageConfig, load_settings

logger = logging.getLogger(__name__)


class Controller:
    """
    Orchestrates the batch commands on top of the pipelines.

    Responsibilities:
    - Load and adjust the configuration from command-line flags.
    - Run the model, design, fit, simulate and analyze pipelines.
    - Read and write design files and CSV outputs with their provenance headers.
    """

    @staticmethod
    def load_settings(
        config_path: Optional[str],
        seed: Optional[int] = None,
        flex: Optional[str] = None,
        strict_constraints: bool = False,
    ) -> StageConfig:
        settings = load_settings(config_path=config_path)
        if seed is not None:
            settings.sim.seed = seed
        if flex is not None:
            settings.sim.flex = flex
        if strict_constraints:
            settings.weighting.strict_constraints = True
        return settings

    @staticmethod
    def load_design(pipeline: Pipeline, design_path: str) -> tuple[Data, DesignFile]:
        """Model pipeline output plus the stored observers, weights and controllers."""
        design = DesignFile.read(design_path)
        if design.config_hash != pipeline.settings.config_hash():
            logger.warning("Design file %s was made with a different config", design_path)
        data = pipeline.run_model(Data())
        data.bank = design.bank
        data.scheme = design.scheme
        data.flex_gains = design.flex_gains
        data.bandpass = design.bandpass
        data.rb_design = design.rb_design
        return data, design

    @staticmethod
    def save_design(data: Data, settings: StageConfig, out_dir: str) -> dict:
        design = DesignFile(
            config_hash=settings.config_hash(),
            bank=data.bank,
            scheme=data.scheme,
            flex_gains=data.flex_gains,
            bandpass=data.bandpass,
            rb_design=data.rb_design,
            training_samples=data.regression.n_samples if data.regression is not None else None,
        )
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "design.yaml")
        digest = design.write(path)
        utilities.write_csv(
            utilities.bank_frame(data.bank),
            os.path.join(out_dir, "bank.csv"),
            {"config_hash": settings.config_hash(), "design_hash": digest},
        )
        return {"design": path, "design_hash": digest}

    @staticmethod
    def run_design(settings: StageConfig, out_dir: str) -> dict:
        """
        Modal model, decoupling, truncation, observer bank, anchored weights and controllers.

        Returns:
            dict: Summary with the design path, its hash and the key design numbers.
        """
        pipeline = Pipeline(settings=settings)
        start_time = time.perf_counter()
        data = pipeline.run_design(pipeline.run_model(Data()))
        summary = Controller.save_design(data, settings, out_dir)
        summary.update(data.summary())
        summary["phase_margin_deg"] = [pid.phase_margin_deg for pid in data.rb_design.pid]
        summary["latency"] = time.perf_counter() - start_time
        return summary

    @staticmethod
    def run_fit_weights(
        settings: StageConfig, design_path: str, out_dir: str, trace_path: Optional[str] = None
    ) -> dict:
        """
        Refit the observer weights on a training trace, simulated or read from CSV.

        A recorded trace carries no per-observer predictions; they are replayed from its inputs
        and measurements through the stored bank.
        """
        pipeline = Pipeline(settings=settings)
        data, _ = Controller.load_design(pipeline, design_path)
        if trace_path is None:
            data = pipeline.run_fit(data)
        else:
            frame, provenance = utilities.read_csv(trace_path)
            trace = utilities.frame_trace(frame, provenance)
            trace.local = data.bank.replay(trace.u_tilde, trace.y)
            data.training_trace = trace
            fitters = pipeline.components["pipeline_fit"][-1:]
            data = Pipeline._run_pipeline(data, fitters)
        summary = Controller.save_design(data, settings, out_dir)
        summary.update(data.summary())
        summary["fit_residual"] = data.scheme.fit_residual
        return summary

    @staticmethod
    async def simulate_ab(
        simulator: ClosedLoopSimulator, data: Data
    ) -> tuple[SimTrace, SimTrace]:
        """Baseline and extended runs in parallel threads; they share no mutable state."""
        simulator.validate_input_data(data)
        design, reference = simulator.extract_input(data)
        simulator.check_stability(design, True)
        baseline, extended = await asyncio.gather(
            asyncio.to_thread(simulator.simulate, design, reference, "baseline", False),
            asyncio.to_thread(simulator.simulate, design, reference, "extended", True),
        )
        return baseline, extended

    @staticmethod
    def run_simulate(settings: StageConfig, design_path: str, out_dir: str) -> dict:
        pipeline = Pipeline(settings=settings)
        data, design = Controller.load_design(pipeline, design_path)
        components = pipeline.components["pipeline_simulate"]
        planners = [c for c in components if isinstance(c, BaseTrajectoryPlanner)]
        data = Pipeline._run_pipeline(data, planners)

        start_time = time.perf_counter()
        simulators = [c for c in components if isinstance(c, BaseSimulator)]
        if settings.sim.flex == "ab" and isinstance(simulators[0], ClosedLoopSimulator):
            baseline, extended = asyncio.run(Controller.simulate_ab(simulators[0], data))
            data.traces.update({"baseline": baseline, "extended": extended})
        else:
            data = Pipeline._run_pipeline(data, simulators)
        latency = time.perf_counter() - start_time

        digest = design.digest()
        files = []
        for label, trace in data.traces.items():
            path = os.path.join(out_dir, f"trace_{label}.csv")
            provenance = utilities.trace_provenance(trace, settings.config_hash(), digest)
            files.append(utilities.write_csv(utilities.trace_frame(trace), path, provenance))
        files.append(
            utilities.write_csv(
                utilities.reference_frame(data.reference),
                os.path.join(out_dir, "reference.csv"),
                {"config_hash": settings.config_hash(), "design_hash": digest},
            )
        )
        return {"files": files, "latency": latency, "samples": data.reference.n_samples}

    @staticmethod
    def run_frf(settings: StageConfig, design_path: str, out_dir: str, points: str) -> dict:
        pipeline = Pipeline(settings=settings)
        data, design = Controller.load_design(pipeline, design_path)
        data = FrfEvaluator(settings, points=points).process(data)
        provenance = {"config_hash": settings.config_hash(), "design_hash": design.digest()}
        files = [
            utilities.write_csv(
                utilities.frf_frame(data.frfs), os.path.join(out_dir, "frf.csv"), provenance
            ),
            utilities.write_csv(
                utilities.suppression_frame(data.frfs, data.suppression_db),
                os.path.join(out_dir, "suppression.csv"),
                provenance,
            ),
        ]
        return {
            "files": files,
            "suppression_db": data.suppression_db,
            "min_suppression_db": float(np.min(data.suppression_db)),
            "max_suppression_db": float(np.max(data.suppression_db)),
        }

    @staticmethod
    def run_metrics(settings: StageConfig, trace_paths: list[str], out_dir: str) -> dict:
        data = Data()
        hashes = {}
        for path in trace_paths:
            frame, provenance = utilities.read_csv(path)
            trace = utilities.frame_trace(frame, provenance)
            data.traces[trace.label] = trace
            hashes = {k: provenance.get(k, "") for k in ("config_hash", "design_hash")}
        data = ExposureEvaluator(settings).process(data)
        band = settings.analysis.mode_band_hz
        table = utilities.comparison_table(data.metrics, data.cps, band)
        files = [
            utilities.write_csv(
                utilities.metrics_frame(data.metrics), os.path.join(out_dir, "metrics.csv"), hashes
            ),
            utilities.write_csv(
                utilities.cps_frame(data.cps), os.path.join(out_dir, "cps.csv"), hashes
            ),
        ]
        if not table.empty:
            files.append(
                utilities.write_csv(table, os.path.join(out_dir, "comparison.csv"), hashes)
            )
        return {"files": files, "comparison": table.to_dict(orient="records")}

    @staticmethod
    def run_demo(settings: StageConfig, out_dir: str) -> dict:
        """
        Design, fit, A/B scan, FRFs and metrics on the configured plant, into one report folder.
        """
        settings.sim.flex = "ab"
        start_time = time.perf_counter()
        design = Controller.run_design(settings, out_dir)
        design_path = design["design"]
        fit = Controller.run_fit_weights(settings, design_path, out_dir)
        frf = Controller.run_frf(settings, design_path, out_dir, points="grid")
        sim = Controller.run_simulate(settings, design_path, out_dir)
        traces = [f for f in sim["files"] if os.path.basename(f).startswith("trace_")]
        metrics = Controller.run_metrics(settings, traces, out_dir)
        Controller.write_die_trace(traces, out_dir, die="die3")
        return {
            "observers": design["observers"],
            "infeasible_constraints": fit["infeasible_constraints"],
            "min_suppression_db": frf["min_suppression_db"],
            "max_suppression_db": frf["max_suppression_db"],
            "comparison": metrics["comparison"],
            "latency": time.perf_counter() - start_time,
        }

    @staticmethod
    def write_die_trace(trace_paths: list[str], out_dir: str, die: str) -> Optional[str]:
        """Tracking error of both runs around one die's constant-velocity window."""
        columns, provenance = {}, {}
        for path in trace_paths:
            frame, provenance = utilities.read_csv(path)
            rows = frame[frame["die"] == die]
            if rows.empty:
                return None
            columns["t"] = rows["t"].to_numpy()
            columns["exposure"] = rows["exposure"].to_numpy()
            label = provenance["label"]
            for name in [c for c in frame.columns if c.startswith("e[")]:
                columns[f"{label}_{name}"] = rows[name].to_numpy()
        path = os.path.join(out_dir, f"{die}_error.csv")
        return utilities.write_csv(pd.DataFrame(columns), path, provenance)

    @staticmethod
    def write_reference(path: str) -> dict:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as file:
            file.write(utilities.reference_page())
        return {"files": [path]}
