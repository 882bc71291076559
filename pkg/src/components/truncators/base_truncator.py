from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, DecoupledPlant, TruncatedPlant


class BaseTruncator(PipelineComponent):
    """Base class for stages that reduce the decoupled plant to the observer model."""

    def validate_input_data(self, data: Data):
        self.require(data, "decoupled")

    def extract_input(self, data: Data) -> DecoupledPlant:
        return data.decoupled

    def update_data(self, data: Data, result: TruncatedPlant):
        data.truncated = result

    @abstractmethod
    def run(self, plant: DecoupledPlant) -> TruncatedPlant:
        pass
