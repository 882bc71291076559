from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, MechModel, ModalForm, PartitionedLpvPlant


class BaseModalDecomposer(PipelineComponent):
    """Base class for stages that bring the physical plant into partitioned modal form."""

    def validate_input_data(self, data: Data):
        self.require(data, "mech")
        if not isinstance(data.mech, MechModel):
            raise ValueError(
                f"Modal decomposer expected a MechModel, got {type(data.mech).__name__}"
            )

    def extract_input(self, data: Data) -> MechModel:
        return data.mech

    def update_data(self, data: Data, result: tuple[ModalForm, PartitionedLpvPlant]):
        data.modal, data.partitioned = result

    @abstractmethod
    def run(self, mech: MechModel) -> tuple[ModalForm, PartitionedLpvPlant]:
        pass
