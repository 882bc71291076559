from abc import abstractmethod
from typing import Optional

from src.components.base_component import PipelineComponent
from src.models import Data, ObserverBank, RegressionData, SimTrace, WeightingScheme


class BaseWeightFitter(PipelineComponent):
    """Base class for stages that fit the position-dependent observer weights."""

    def validate_input_data(self, data: Data):
        self.require(data, "bank")
        trace = data.training_trace
        if trace is not None and trace.local is None:
            raise ValueError("Weight fitter expected a training trace with local predictions")

    def extract_input(self, data: Data) -> tuple[ObserverBank, Optional[SimTrace]]:
        return data.bank, data.training_trace

    def update_data(
        self, data: Data, result: tuple[WeightingScheme, Optional[RegressionData]]
    ):
        data.scheme, data.regression = result

    @abstractmethod
    def run(
        self, bank: ObserverBank, trace: Optional[SimTrace]
    ) -> tuple[WeightingScheme, Optional[RegressionData]]:
        pass
