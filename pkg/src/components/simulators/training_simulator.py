from src.components.simulators.closed_loop_simulator import ClosedLoopSimulator
from src.interconnection import LoopDesign
from src.models import Data, ReferenceTrace, SimTrace


class TrainingSimulator(ClosedLoopSimulator):
    """Baseline run that records every local prediction for the weight regression."""

    def __init__(self, settings):
        super().__init__(settings, flex="off")

    def run(self, design: LoopDesign, reference: ReferenceTrace) -> SimTrace:
        self.check_stability(design, False)
        return self.simulate(design, reference, "training", False, record_local=True)

    def update_data(self, data: Data, result: SimTrace):
        data.training_trace = result
