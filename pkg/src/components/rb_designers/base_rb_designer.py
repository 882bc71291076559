from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, DecoupledPlant, RigidBodyDesign


class BaseRbDesigner(PipelineComponent):
    """Base class for stages that design the decoupled rigid-body loops."""

    def validate_input_data(self, data: Data):
        self.require(data, "decoupled")

    def extract_input(self, data: Data) -> DecoupledPlant:
        return data.decoupled

    def update_data(self, data: Data, result: RigidBodyDesign):
        data.rb_design = result

    @abstractmethod
    def run(self, plant: DecoupledPlant) -> RigidBodyDesign:
        pass
