from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, DecoupledPlant, PartitionedLpvPlant, SchedulingPoint


class BaseDecoupler(PipelineComponent):
    """Base class for rigid-body input/output decoupling stages."""

    def validate_input_data(self, data: Data):
        self.require(data, "partitioned", "grid")

    def extract_input(self, data: Data) -> tuple[PartitionedLpvPlant, list[SchedulingPoint]]:
        return data.partitioned, data.grid

    def update_data(self, data: Data, result: DecoupledPlant):
        data.decoupled = result

    @abstractmethod
    def run(self, plant: PartitionedLpvPlant, grid: list[SchedulingPoint]) -> DecoupledPlant:
        pass
