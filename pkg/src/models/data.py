from pprint import pformat
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from src.models.analysis import CpsCurve, ExposureMetrics, FrfData, SimTrace
from src.models.control import BandPass, FlexGains, RigidBodyDesign
from src.models.observer import NoiseDesign, ObserverBank
from src.models.plant import (
    DecoupledPlant,
    MechModel,
    ModalForm,
    PartitionedLpvPlant,
    SchedulingPoint,
    TruncatedPlant,
)
from src.models.trajectory import ReferenceTrace
from src.models.weighting import RegressionData, WeightingScheme


class Data(BaseModel):
    """Blackboard passed through the pipeline stages."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mech: Optional[MechModel] = None
    modal: Optional[ModalForm] = None
    partitioned: Optional[PartitionedLpvPlant] = None
    decoupled: Optional[DecoupledPlant] = None
    truncated: Optional[TruncatedPlant] = None
    grid: list[SchedulingPoint] = []
    noise: Optional[NoiseDesign] = None
    bank: Optional[ObserverBank] = None
    regression: Optional[RegressionData] = None
    scheme: Optional[WeightingScheme] = None
    flex_gains: Optional[FlexGains] = None
    bandpass: Optional[BandPass] = None
    rb_design: Optional[RigidBodyDesign] = None
    reference: Optional[ReferenceTrace] = None
    training_trace: Optional[SimTrace] = None
    traces: dict[str, SimTrace] = Field(default_factory=dict)
    frfs: list[FrfData] = []
    suppression_db: list[float] = []
    metrics: dict[str, ExposureMetrics] = Field(default_factory=dict)
    cps: dict[str, list[CpsCurve]] = Field(default_factory=dict)

    def summary(self) -> dict:
        """Key numbers of the run, for logging and the CLI."""
        out: dict = {}
        if self.bank is not None:
            out["observers"] = self.bank.n
            out["max_spectral_radius"] = max(o.spectral_radius for o in self.bank.observers)
        if self.scheme is not None:
            out["constraint_residual"] = self.scheme.constraint_residual
            out["infeasible_constraints"] = self.scheme.infeasible
        if self.suppression_db:
            out["suppression_db"] = self.suppression_db
        for label, metrics in self.metrics.items():
            out[f"msd_{label}"] = {r.die + "/" + r.axis: r.msd_peak for r in metrics.records}
        return out

    def __str__(self):
        return pformat(self.summary())
