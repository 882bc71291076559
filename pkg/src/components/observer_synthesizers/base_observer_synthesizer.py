from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, NoiseDesign, ObserverBank, SchedulingPoint, TruncatedPlant


class BaseObserverSynthesizer(PipelineComponent):
    """Base class for stages that design the local observers on the grid."""

    def validate_input_data(self, data: Data):
        self.require(data, "truncated", "grid")

    def extract_input(self, data: Data) -> tuple[TruncatedPlant, list[SchedulingPoint]]:
        return data.truncated, data.grid

    def update_data(self, data: Data, result: tuple[ObserverBank, NoiseDesign]):
        data.bank, data.noise = result

    @abstractmethod
    def run(
        self, truncated: TruncatedPlant, grid: list[SchedulingPoint]
    ) -> tuple[ObserverBank, NoiseDesign]:
        pass
