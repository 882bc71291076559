from abc import abstractmethod

from src.components.base_component import PipelineComponent
from src.models import Data, MechModel, SchedulingPoint, Workspace


class BasePlantLoader(PipelineComponent):
    """Base class for stages that produce the physical plant and the design grid."""

    def validate_input_data(self, data: Data):
        """Plant loaders don't require input from data."""
        pass

    def extract_input(self, data: Data) -> None:
        """Plant loaders don't require input from data."""
        pass

    def update_data(self, data: Data, result: tuple[MechModel, list[SchedulingPoint]]):
        data.mech, data.grid = result

    def workspace(self) -> Workspace:
        return self.settings.workspace.rect()

    def grid(self, workspace: Workspace) -> list[SchedulingPoint]:
        grid = self.settings.grid
        if grid.points:
            return [SchedulingPoint(q_x=x, q_y=y) for x, y in grid.points]
        return workspace.grid(grid.nx, grid.ny)

    @abstractmethod
    def run(self) -> tuple[MechModel, list[SchedulingPoint]]:
        pass
