from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.interconnection import LoopDesign
from src.models import Data, ReferenceTrace


class BaseSimulator(PipelineComponent):
    """Base class for stages that run the sampled closed loop on a reference."""

    def validate_input_data(self, data: Data):
        self.require(
            data, "decoupled", "bank", "scheme", "flex_gains", "bandpass", "rb_design", "reference"
        )

    def extract_input(self, data: Data) -> tuple[LoopDesign, ReferenceTrace]:
        design = LoopDesign(
            plant=data.decoupled,
            bank=data.bank,
            scheme=data.scheme,
            gains=data.flex_gains,
            bandpass=data.bandpass,
            rb_design=data.rb_design,
        )
        return design, data.reference

    @abstractmethod
    def run(self, design: LoopDesign, reference: ReferenceTrace):
        pass
