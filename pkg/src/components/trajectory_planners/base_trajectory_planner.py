from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, ReferenceTrace


class BaseTrajectoryPlanner(PipelineComponent):
    """Base class for stages that produce the sampled reference."""

    def validate_input_data(self, data: Data):
        """Trajectory planners only read the configuration."""
        pass

    def extract_input(self, data: Data) -> None:
        """Trajectory planners only read the configuration."""
        pass

    def update_data(self, data: Data, result: ReferenceTrace):
        data.reference = result

    @abstractmethod
    def run(self) -> ReferenceTrace:
        pass
