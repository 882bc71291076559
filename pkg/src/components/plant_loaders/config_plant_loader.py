import logging

from src.components.plant_loaders.base_plant_loader import BasePlantLoader
from src.errors import ConfigError, OutOfWorkspaceError
from src.models import MechModel, SchedulingPoint
from src.resources import plants

logger = logging.getLogger(__name__)


class ConfigPlantLoader(BasePlantLoader):
    """Builds the plant from `plant.preset` or from the matrix literals of the config."""

    def run(self) -> tuple[MechModel, list[SchedulingPoint]]:
        plant = self.settings.plant
        workspace = self.workspace()
        if plant.preset is not None:
            factory = getattr(plants, plant.preset, None)
            if factory is None or not callable(factory):
                raise ConfigError(f"plant.preset: unknown preset '{plant.preset}'")
            mech = factory(workspace)
        else:
            try:
                mech = plants.from_literals(
                    M=plant.M,
                    D=plant.D,
                    K=plant.K,
                    Phi_a=plant.Phi_a,
                    Phi_s=plant.Phi_s.model_dump(),
                    workspace=workspace,
                )
            except ValueError as e:
                raise ConfigError(f"plant: {e}")

        grid = self.grid(workspace)
        if not self.settings.workspace.allow_extrapolation:
            for point in grid:
                if not workspace.contains(point):
                    raise OutOfWorkspaceError("Grid point outside the workspace", point.as_tuple())
        logger.info(
            "Plant with %d coordinates, %d inputs, %d outputs; %d grid points",
            mech.n_x,
            mech.n_u,
            mech.n_y,
            len(grid),
        )
        return mech, grid
