import importlib
from typing import Optional

from pydantic import ValidationError

from src.components.base_component import PipelineComponent
from src.errors import ConfigError
from src.models import Data
from src.settings import ComponentSpec, StageConfig, load_settings

PIPELINES = (
    "pipeline_model",
    "pipeline_design",
    "pipeline_fit",
    "pipeline_simulate",
    "pipeline_analyze",
)


class Pipeline:
    def __init__(
        self,
        config_path: Optional[str] = None,
        config: Optional[dict] = None,
        settings: Optional[StageConfig] = None,
    ):
        """
        Initialize the model, design, fit, simulate and analyze pipelines.

        Args:
            config_path (str): Path to the YAML configuration file.
            config (dict): Configuration dictionary. If provided, it overrides config_path.
            settings (StageConfig): Already validated configuration; overrides both.
        """
        self.settings = settings or load_settings(config_path=config_path, config=config)
        self.components = {key: self._load_pipeline_components(key) for key in PIPELINES}

    def _load_pipeline_components(self, pipeline_key: str) -> list[PipelineComponent]:
        """Load pipeline components based on the configuration."""
        specs: list[ComponentSpec] = getattr(self.settings, pipeline_key)
        return [
            self._component_factory(spec.component, spec.implementation, spec.resources, spec.args)
            for spec in specs
        ]

    def _component_factory(
        self, component_type: str, class_name: str, resources: dict, args: dict
    ) -> PipelineComponent:
        """Dynamically import a class from a module and instantiate it with resources."""
        module_name = f"src.components.{component_type}s"
        file_name = self._camel_to_snake(class_name)
        full_module_name = f"{module_name}.{file_name}"

        try:
            module = importlib.import_module(full_module_name)
        except ModuleNotFoundError as e:
            raise ConfigError(f"No {component_type} module {full_module_name}: {e}")
        component_class = getattr(module, class_name, None)
        if component_class is None:
            raise ConfigError(f"Component {class_name} not found in module {full_module_name}.")

        resolved_resources = {k: self._resolve_resource(k, v) for k, v in resources.items()}
        try:
            return component_class(self.settings, **resolved_resources, **(args or {}))
        except TypeError as e:
            raise ConfigError(f"Invalid arguments for {class_name}: {e}")

    def run_model(self, data: Data) -> Data:
        """Load the plant and reduce it to the decoupled and truncated models."""
        return self._run_pipeline(data, self.components["pipeline_model"])

    def run_design(self, data: Data) -> Data:
        """Synthesize observers, the constraint-anchored weights and both controllers."""
        return self._run_pipeline(data, self.components["pipeline_design"])

    def run_fit(self, data: Data) -> Data:
        """Simulate the training scan and fit the observer weights on it."""
        return self._run_pipeline(data, self.components["pipeline_fit"])

    def run_simulate(self, data: Data) -> Data:
        """Plan the scan and run the closed loop."""
        return self._run_pipeline(data, self.components["pipeline_simulate"])

    def run_analyze(self, data: Data) -> Data:
        """FRFs, resonance suppression and exposure metrics."""
        return self._run_pipeline(data, self.components["pipeline_analyze"])

    def run_combined(self, data: Data) -> Data:
        """Model and design, followed by simulation and analysis."""
        for step in (self.run_model, self.run_design, self.run_simulate, self.run_analyze):
            data = step(data)
        return data

    @staticmethod
    def _resolve_resource(resource_key: str, resource_value: str):
        """Resolve a resource by dynamically importing it from the appropriate module."""
        module_name = f"src.resources.{resource_key}s"
        module = importlib.import_module(module_name)
        resource = getattr(module, resource_value, None)
        if resource is None:
            raise ConfigError(f"Resource {resource_value} not found in {module_name}.")
        return resource

    @staticmethod
    def _camel_to_snake(camel_str: str) -> str:
        """Convert CamelCase to snake_case."""
        return "".join(["_" + c.lower() if c.isupper() else c for c in camel_str]).lstrip("_")

    @staticmethod
    def _run_pipeline(data: Data, components: list[PipelineComponent]) -> Data:
        """Run a series of components on the given data."""
        for component in components:
            try:
                data = component.process(data)
            except ValidationError as e:
                raise ConfigError(f"Invalid data passed to {component.__class__.__name__}: {e}")
        return data
