import hashlib
import json
import os
from typing import Any, Literal, Mapping, Optional

import dotenv
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import ConfigError
from src.models.plant import Workspace

ENV_PREFIX = "STAGECTL__"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PolynomialTable(StrictModel):
    degree: tuple[int, int] = Field(description="Polynomial degree pair (d_x, d_y).")
    coefficients: list = Field(
        description="Nested list of shape rows x cols x (d_x+1) x (d_y+1); entry [i][j][v][w] "
        "multiplies q_x^v q_y^w."
    )


class PlantSettings(StrictModel):
    preset: Optional[str] = Field(
        "synth_stage", description="Name of a plant preset in src.resources.plants."
    )
    M: Optional[list[list[float]]] = Field(None, description="Mass matrix literal (kg).")
    D: Optional[list[list[float]]] = Field(None, description="Damping matrix literal (N s/m).")
    K: Optional[list[list[float]]] = Field(None, description="Stiffness matrix literal (N/m).")
    Phi_a: Optional[list[list[float]]] = Field(None, description="Actuator influence map.")
    Phi_s: Optional[PolynomialTable] = Field(None, description="Position-dependent sensor map.")

    @model_validator(mode="after")
    def _preset_or_literals(self):
        literals = [self.M, self.D, self.K, self.Phi_a, self.Phi_s]
        if any(item is not None for item in literals):
            if not all(item is not None for item in literals):
                raise ValueError("plant literals need all of M, D, K, Phi_a and Phi_s")
            self.preset = None
        elif self.preset is None:
            raise ValueError("plant needs either a preset or matrix literals")
        return self


class WorkspaceSettings(StrictModel):
    x: tuple[float, float] = Field((-0.15, 0.15), description="Workspace x bounds (m).")
    y: tuple[float, float] = Field((-0.15, 0.15), description="Workspace y bounds (m).")
    allow_extrapolation: bool = Field(
        False, description="Accept scheduling points outside the workspace rectangle."
    )

    def rect(self) -> Workspace:
        return Workspace(x_lo=self.x[0], x_hi=self.x[1], y_lo=self.y[0], y_hi=self.y[1])


class GridSettings(StrictModel):
    nx: int = Field(3, ge=1, description="Local observer count along x.")
    ny: int = Field(3, ge=1, description="Local observer count along y.")
    points: Optional[list[tuple[float, float]]] = Field(
        None, description="Explicit grid points (m); overrides nx/ny."
    )


class ToleranceSettings(StrictModel):
    symmetry_rtol: float = Field(1e-9, description="Relative asymmetry accepted in M, D, K.")
    damping_offdiag: float = Field(
        1e-6, description="Off-diagonal Frobenius mass of modal damping, relative to diagonal."
    )
    modal_rtol: float = Field(1e-8, description="Mass/stiffness normalization tolerance.")
    rigid_tol: float = Field(
        1e-6, description="Eigenfrequency below which a mode is rigid (rad/s)."
    )
    eig_rtol: float = Field(
        1e-12, description="Eigenvalues below eig_rtol * max eigenvalue count as rigid."
    )
    cond_limit: float = Field(1e8, description="Condition number limit for pseudoinverses.")
    readout_rtol: float = Field(
        1e-9,
        description="Flexible-mode readout below this fraction of the rigid-body readout leaves "
        "the mode unobservable; its flexible-mode gains are set to zero.",
    )


class ObserverSettings(StrictModel):
    ts: float = Field(5e-5, gt=0, description="Design sampling time (s).")
    keep: list[int] = Field([0], description="Retained flexible modes (0-based).")
    qw_scale: float = Field(1e-6, description="Process noise scale of Qw = s (B B^T + f I).")
    qw_floor: float = Field(1e-9, description="Identity floor f inside Qw.")
    rv: float = Field(1e-12, description="Measurement noise variance per channel (m^2).")
    scheduling: Literal["reference", "measured"] = Field(
        "reference", description="Scheduling source for p(k)."
    )
    dare_tol: float = Field(1e-12, description="Doubling convergence threshold on P increment.")
    dare_max_iter: int = Field(200, description="Doubling iteration cap.")


class WeightingSettings(StrictModel):
    m_x: int = Field(1, ge=0, description="Polynomial order of the weights in q_x.")
    m_y: int = Field(1, ge=0, description="Polynomial order of the weights in q_y.")
    feasibility_tol: float = Field(1e-8, description="Constraint residual flagged as infeasible.")
    strict_constraints: bool = Field(False, description="Fail when constraints are infeasible.")
    raster_lines: int = Field(4, ge=2, description="Lines of the training raster scan.")


class FlexControlSettings(StrictModel):
    controlled: list[int] = Field([0], description="Controlled flexible modes (0-based).")
    zeta_target: list[float] = Field([0.008], description="Target damping ratios.")
    omega_target_hz: Optional[list[float]] = Field(
        None, description="Target eigenfrequencies (Hz); defaults to the open-loop ones."
    )
    q: float = Field(5.0, gt=0, description="Band-pass quality factor.")


class AxisSettings(StrictModel):
    f_bw_hz: float = Field(description="Rigid-body bandwidth (Hz).")
    mass: float = Field(1.0, gt=0, description="Modal mass in decoupled coordinates.")
    feedforward: bool = Field(True, description="Enable mass feedforward.")
    snap_gain: float = Field(0.0, description="Snap feedforward gain.")


class RbControlSettings(StrictModel):
    axes: dict[str, AxisSettings] = Field(
        default_factory=lambda: {
            "x": AxisSettings(f_bw_hz=100.0),
            "y": AxisSettings(f_bw_hz=100.0),
            "rz": AxisSettings(f_bw_hz=80.0),
        },
        description=(
            "Per-axis PID settings, ordered as the decoupled rigid-body channels. x and y default "
            "to 100 Hz instead of 120 Hz so the bandwidth stays below the first resonance / "
            "resonance_ratio; 120 Hz is accepted and logs a warning."
        ),
    )
    resonance_ratio: float = Field(
        10.0, description="Bandwidth must stay below the first controlled resonance / ratio."
    )


class MotionLimitSettings(StrictModel):
    v_max: float = Field(description="Velocity limit (m/s).")
    a_max: float = Field(description="Acceleration limit (m/s^2).")
    j_max: float = Field(3500.0, description="Jerk limit (m/s^3).")
    s_max: float = Field(7e5, description="Snap limit (m/s^4).")


class TrajectorySettings(StrictModel):
    limits: dict[str, MotionLimitSettings] = Field(
        default_factory=lambda: {
            "x": MotionLimitSettings(v_max=0.8, a_max=35.0),
            "y": MotionLimitSettings(v_max=0.38, a_max=15.0),
        },
        description="Per-axis motion limits for the planned axes (x, y).",
    )
    guard_s: float = Field(0.01, ge=0, description="Exposure guard time per side (s).")
    settle_s: float = Field(0.02, ge=0, description="Hold time between moves (s).")


class SimSettings(StrictModel):
    ts: float = Field(5e-5, gt=0, description="Simulation sampling time (s).")
    flex: Literal["on", "off", "ab"] = Field("ab", description="Flexible-mode loop mode.")
    seed: int = Field(0, ge=0, description="Noise seed.")
    initial_state: Optional[list[float]] = Field(None, description="Initial plant state.")
    record_local: bool = Field(False, description="Record per-observer predictions.")


class NoiseSettings(StrictModel):
    sensor_std: list[float] = Field([3e-10, 3e-10, 3e-10], description="Sensor noise std (m).")
    force_std: float = Field(1e-3, ge=0, description="Actuator force noise std (N).")


class AnalysisSettings(StrictModel):
    f_min_hz: float = Field(10.0, gt=0, description="Lowest FRF frequency (Hz).")
    f_max_hz: float = Field(5000.0, gt=0, description="Highest FRF frequency (Hz).")
    n_points: int = Field(600, ge=2, description="Log-spaced FRF points.")
    window_s: float = Field(5e-3, gt=0, description="MA/MSD window length T (s).")
    psd_segment: int = Field(2048, ge=16, description="Welch segment length.")
    mode_band_hz: tuple[float, float] = Field(
        (900.0, 1250.0), description="Band holding the controlled resonance (Hz)."
    )
    channel: tuple[int, int] = Field((0, 0), description="FRF channel (output, input).")
    frf_points: Optional[list[tuple[float, float]]] = Field(
        None, description="Explicit FRF points for --points list."
    )


class ComponentSpec(StrictModel):
    component: str
    implementation: str
    resources: dict[str, str] = {}
    args: dict[str, Any] = {}


def _specs(*entries: tuple) -> list[ComponentSpec]:
    return [
        ComponentSpec(component=c, implementation=i, resources=r) for c, i, r in entries
    ]


class StageConfig(StrictModel):
    plant: PlantSettings = PlantSettings()
    workspace: WorkspaceSettings = WorkspaceSettings()
    grid: GridSettings = GridSettings()
    tolerances: ToleranceSettings = ToleranceSettings()
    observer: ObserverSettings = ObserverSettings()
    weighting: WeightingSettings = WeightingSettings()
    flex_control: FlexControlSettings = FlexControlSettings()
    rb_control: RbControlSettings = RbControlSettings()
    trajectory: TrajectorySettings = TrajectorySettings()
    sim: SimSettings = SimSettings()
    noise: NoiseSettings = NoiseSettings()
    analysis: AnalysisSettings = AnalysisSettings()

    pipeline_model: list[ComponentSpec] = _specs(
        ("plant_loader", "ConfigPlantLoader", {}),
        ("modal_decomposer", "EigenModalDecomposer", {}),
        ("decoupler", "PseudoinverseDecoupler", {}),
        ("truncator", "ComplianceTruncator", {}),
    )
    pipeline_design: list[ComponentSpec] = _specs(
        ("observer_synthesizer", "RiccatiObserverBank", {}),
        ("weight_fitter", "ConstrainedLsqFitter", {}),
        ("flex_designer", "ModalFeedbackDesigner", {}),
        ("rb_designer", "MassLinePid", {}),
    )
    pipeline_fit: list[ComponentSpec] = _specs(
        ("trajectory_planner", "ScanPlanner", {"layout": "training_raster"}),
        ("simulator", "TrainingSimulator", {}),
        ("weight_fitter", "ConstrainedLsqFitter", {}),
    )
    pipeline_simulate: list[ComponentSpec] = _specs(
        ("trajectory_planner", "ScanPlanner", {"layout": "five_die_surrogate"}),
        ("simulator", "ClosedLoopSimulator", {}),
    )
    pipeline_analyze: list[ComponentSpec] = _specs(
        ("evaluator", "FrfEvaluator", {}),
        ("evaluator", "ExposureEvaluator", {}),
    )

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump of the validated config."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def apply_env_overrides(raw: dict, environ: Mapping[str, str]) -> dict:
    """
    Apply STAGECTL__SECTION__KEY=<yaml literal> overrides to a raw config dict.

    Args:
        raw (dict): Config as loaded from YAML.
        environ (Mapping[str, str]): Environment to read overrides from.

    Returns:
        dict: The updated config dict.
    """
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        path = [part.lower() for part in name[len(ENV_PREFIX) :].split("__") if part]
        if not path:
            continue
        try:
            value = yaml.safe_load(environ[name])
        except yaml.YAMLError as e:
            raise ConfigError(f"Environment override {name} is not a valid literal: {e}")
        node = raw
        for key in path[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Environment override {name} descends into a non-table key")
            node = child
        node[path[-1]] = value
    return raw


def load_settings(
    config_path: Optional[str] = None,
    config: Optional[dict] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> StageConfig:
    """
    Load and validate the stage configuration.

    Args:
        config_path (str): Path to the YAML configuration file.
        config (dict): Configuration dictionary. If provided, it overrides config_path.
        environ (Mapping[str, str]): Environment for overrides; defaults to os.environ.

    Returns:
        StageConfig: The validated configuration.
    """
    if config and config_path:
        raise ConfigError("Provide either 'config_path' or 'config', not both.")
    dotenv.load_dotenv()
    if config is not None:
        raw = json.loads(json.dumps(config))
    elif config_path:
        try:
            with open(config_path, "r") as file:
                raw = yaml.safe_load(file) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read config {config_path}: {e}")
    else:
        raw = {}
    raw = apply_env_overrides(raw, os.environ if environ is None else environ)
    try:
        return StageConfig.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}")
