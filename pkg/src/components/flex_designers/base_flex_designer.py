from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import BandPass, Data, DecoupledPlant, FlexGains, TruncatedPlant


class BaseFlexDesigner(PipelineComponent):
    """Base class for stages that design the flexible-mode feedback."""

    def validate_input_data(self, data: Data):
        self.require(data, "decoupled", "truncated")

    def extract_input(self, data: Data) -> tuple[DecoupledPlant, TruncatedPlant]:
        return data.decoupled, data.truncated

    def update_data(self, data: Data, result: tuple[FlexGains, BandPass]):
        data.flex_gains, data.bandpass = result

    @abstractmethod
    def run(self, plant: DecoupledPlant, truncated: TruncatedPlant) -> tuple[FlexGains, BandPass]:
        pass
