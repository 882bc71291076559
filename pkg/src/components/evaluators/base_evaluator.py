from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data


class BaseEvaluator(PipelineComponent):
    """Base class for analysis stages; `required` names the Data fields they read."""

    required: tuple[str, ...] = ()

    def validate_input_data(self, data: Data):
        self.require(data, *self.required)

    @abstractmethod
    def run(self, *args):
        pass
