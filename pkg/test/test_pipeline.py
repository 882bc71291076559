import asyncio
import copy

import numpy as np
import pytest
import yaml

from src.components.observer_synthesizers.riccati_observer_bank import RiccatiObserverBank
from src.errors import ConfigError, OutOfWorkspaceError
from src.models import Data
from src.pipeline import Pipeline
from src.settings import load_settings

CONFIG_PATH = "test/configs/config.yaml"


@pytest.fixture(scope="module")
def raw_config() -> dict:
    with open(CONFIG_PATH, "r") as f:
        return yaml.safe_load(f)


class TestSettings:
    def test_defaults_match_the_shipped_config(self, settings):
        assert settings.plant.preset == "synth_stage"
        assert settings.observer.ts == 5e-5
        assert settings.grid.nx == 3 and settings.grid.ny == 3
        assert list(settings.rb_control.axes) == ["x", "y", "rz"]

    def test_environment_override(self):
        environ = {"STAGECTL__OBSERVER__TS": "1.0e-4", "STAGECTL__GRID__NX": "2", "OTHER": "1"}
        settings = load_settings(config_path=CONFIG_PATH, environ=environ)
        assert settings.observer.ts == 1e-4
        assert settings.grid.nx == 2
        assert settings.grid.ny == 3

    def test_environment_override_is_validated(self):
        with pytest.raises(ConfigError):
            load_settings(config_path=CONFIG_PATH, environ={"STAGECTL__GRID__NX": "0"})

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_settings(config_path="test/configs/missing.yaml", environ={})

    def test_path_and_dict_are_exclusive(self, raw_config):
        with pytest.raises(ConfigError):
            load_settings(config_path=CONFIG_PATH, config=raw_config, environ={})

    def test_unknown_key(self, raw_config):
        config = copy.deepcopy(raw_config)
        config["observer"]["horizon"] = 10
        with pytest.raises(ConfigError) as info:
            load_settings(config=config, environ={})
        assert "observer.horizon" in str(info.value)

    def test_config_hash_tracks_content(self, raw_config):
        first = load_settings(config=raw_config, environ={})
        second = load_settings(config=copy.deepcopy(raw_config), environ={})
        assert first.config_hash() == second.config_hash()
        changed = copy.deepcopy(raw_config)
        changed["sim"]["seed"] = 12345
        assert load_settings(config=changed, environ={}).config_hash() != first.config_hash()


class TestComponentFactory:
    def test_pipelines_are_built_from_the_config(self, pipeline):
        names = [type(c).__name__ for c in pipeline.components["pipeline_design"]]
        assert names == [
            "RiccatiObserverBank",
            "ConstrainedLsqFitter",
            "ModalFeedbackDesigner",
            "MassLinePid",
        ]

    def test_unknown_implementation(self, raw_config):
        config = copy.deepcopy(raw_config)
        config["pipeline_design"][0]["implementation"] = "KalmanObserverBank"
        with pytest.raises(ConfigError):
            Pipeline(config=config)

    def test_unknown_resource(self, raw_config):
        config = copy.deepcopy(raw_config)
        config["pipeline_simulate"][0]["resources"]["layout"] = "seven_die"
        with pytest.raises(ConfigError):
            Pipeline(config=config)

    def test_unexpected_argument(self, raw_config):
        config = copy.deepcopy(raw_config)
        config["pipeline_analyze"][0]["args"] = {"window": 3}
        with pytest.raises(ConfigError):
            Pipeline(config=config)


class TestStages:
    def test_missing_upstream_output(self, settings):
        with pytest.raises(ValueError) as info:
            RiccatiObserverBank(settings).process(Data())
        assert "RiccatiObserverBank" in str(info.value)

    def test_failing_stage_is_named(self, raw_config):
        config = copy.deepcopy(raw_config)
        config["grid"]["points"] = [[0.0, 0.0], [0.3, 0.0]]
        pipeline = Pipeline(config=config)
        with pytest.raises(OutOfWorkspaceError) as info:
            pipeline.run_model(Data())
        assert info.value.stage == "ConfigPlantLoader"
        assert info.value.point == (0.3, 0.0)

    def test_model_pipeline_outputs(self, model_data):
        assert len(model_data.grid) == 9
        assert model_data.decoupled.n_rb == 3
        assert model_data.truncated.keep == [0]
        assert model_data.modal.n_fm == 2
        assert model_data.modal.omega[3] == pytest.approx(2 * np.pi * 1050.0, rel=1e-9)

    def test_design_summary(self, design_data):
        summary = design_data.summary()
        assert summary["observers"] == 9
        assert summary["max_spectral_radius"] < 1.0
        assert summary["infeasible_constraints"]


@pytest.mark.asyncio
async def test_parallel_model_runs(pipeline, model_data):
    """Model pipelines run in threads give the same plant as the sequential run."""
    results = await asyncio.gather(
        *(asyncio.to_thread(pipeline.run_model, Data()) for _ in range(3))
    )
    for data in results:
        np.testing.assert_array_equal(data.decoupled.b_fm, model_data.decoupled.b_fm)
        assert [p.as_tuple() for p in data.grid] == [p.as_tuple() for p in model_data.grid]
