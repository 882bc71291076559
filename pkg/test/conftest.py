import numpy as np
import pytest

from src.interconnection import LoopDesign
from src.models import Data, ReferenceTrace, SimTrace
from src.pipeline import Pipeline
from src.settings import StageConfig, load_settings

CONFIG_PATH = "test/configs/config.yaml"
TWO_MASS_PATH = "test/configs/config_two_mass.yaml"


@pytest.fixture(scope="session")
def settings() -> StageConfig:
    return load_settings(config_path=CONFIG_PATH)


@pytest.fixture(scope="session")
def pipeline(settings) -> Pipeline:
    return Pipeline(settings=settings)


@pytest.fixture(scope="session")
def model_data(pipeline) -> Data:
    """SynthStage plant up to the truncated observer model."""
    return pipeline.run_model(Data())


@pytest.fixture(scope="session")
def design_data(pipeline, model_data) -> Data:
    """Observer bank, anchored weights and both controllers on top of model_data."""
    return pipeline.run_design(model_data.model_copy())


@pytest.fixture(scope="session")
def loop_design(design_data) -> LoopDesign:
    return LoopDesign(
        plant=design_data.decoupled,
        bank=design_data.bank,
        scheme=design_data.scheme,
        gains=design_data.flex_gains,
        bandpass=design_data.bandpass,
        rb_design=design_data.rb_design,
    )


@pytest.fixture(scope="session")
def two_mass_data() -> Data:
    pipeline = Pipeline(config_path=TWO_MASS_PATH)
    return pipeline.run_design(pipeline.run_model(Data()))


@pytest.fixture
def quiet_settings(settings) -> StageConfig:
    """Default settings without sensor or force noise."""
    out = settings.model_copy(deep=True)
    out.noise.sensor_std = [0.0, 0.0, 0.0]
    out.noise.force_std = 0.0
    return out


@pytest.fixture
def still_reference():
    """Builds a reference that holds every axis at zero."""

    def build(axes: list[str], ts: float, n_samples: int) -> ReferenceTrace:
        zeros = np.zeros((n_samples, len(axes)))
        return ReferenceTrace(
            axes=axes,
            ts=ts,
            position=zeros,
            velocity=zeros,
            acceleration=zeros,
            jerk=zeros,
            snap=zeros,
        )

    return build


@pytest.fixture
def make_trace():
    """Builds a closed-loop trace around a given tracking error; other signals are zero."""

    def build(label: str, e: np.ndarray, windows: list, ts: float = 5e-5) -> SimTrace:
        n = e.shape[0]
        signals = {
            name: np.zeros((n, 3))
            for name in ("reference", "y", "u_rb", "u_ff", "u_fm", "u_tilde", "sensor_noise")
        }
        return SimTrace(
            label=label,
            flex_enabled=label != "baseline",
            ts=ts,
            axes=["x", "y", "rz"],
            p=np.zeros((n, 2)),
            e=e,
            modal=np.zeros((n, 10)),
            q_hat=np.zeros((n, 8)),
            force_noise=np.zeros((n, 3)),
            windows=windows,
            **signals,
        )

    return build
