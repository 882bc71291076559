from src.models.analysis import CpsCurve, ExposureMetrics, FrfData, MetricRecord, SimTrace
from src.models.base import Array, ArrayModel
from src.models.control import (
    BandPass,
    DiscreteFilter,
    FeedforwardDesign,
    FlexGains,
    ModalTargets,
    PidAxisDesign,
    RigidBodyDesign,
)
from src.models.data import Data
from src.models.design import DesignFile
from src.models.observer import DiscreteModel, LocalObserver, NoiseDesign, ObserverBank
from src.models.plant import (
    DecoupledPlant,
    FrozenPlant,
    MechModel,
    ModalForm,
    OutputDecoupling,
    PartitionedLpvPlant,
    PositionPolynomial,
    SchedulingPoint,
    TruncatedPlant,
    Workspace,
    as_point,
)
from src.models.trajectory import MotionLimits, ReferenceTrace, ScanLine, ScanWindow
from src.models.weighting import RegressionData, SpatialBasis, WeightingScheme

__all__ = [
    "Array",
    "ArrayModel",
    "BandPass",
    "CpsCurve",
    "Data",
    "DecoupledPlant",
    "DesignFile",
    "DiscreteFilter",
    "DiscreteModel",
    "ExposureMetrics",
    "FeedforwardDesign",
    "FlexGains",
    "FrfData",
    "FrozenPlant",
    "LocalObserver",
    "MechModel",
    "MetricRecord",
    "ModalForm",
    "ModalTargets",
    "MotionLimits",
    "NoiseDesign",
    "ObserverBank",
    "OutputDecoupling",
    "PartitionedLpvPlant",
    "PidAxisDesign",
    "PositionPolynomial",
    "ReferenceTrace",
    "RegressionData",
    "RigidBodyDesign",
    "ScanLine",
    "ScanWindow",
    "SchedulingPoint",
    "SimTrace",
    "SpatialBasis",
    "TruncatedPlant",
    "WeightingScheme",
    "Workspace",
    "as_point",
]
