"""slipmeter: quantify and compare the motion-distortion difficulty of UGV datasets.

The pipeline: parse deployment logs (or simulate them), align command and
velocity streams, compute the per-step slip between the ideal slip-less
model and the observed body velocity, summarize the slip moduli, test pairs
of datasets against each other, and place deployments on a kinetic-energy vs
terrain-complexity map.
"""

from .errors import (
    AlignmentError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    SlipmeterError,
    TerrainNotFoundError,
    ValidationError,
)
from .ingest import (
    AlignedDataset,
    PoseSample,
    align,
    body_velocity_from_poses,
    load_dataset,
    parse_log,
    wrap_angle,
)
from .kinematics import (
    AckermannCommand,
    BodyVelocity,
    VehicleSpec,
    WheelCommand,
    ideal_bicycle,
    ideal_diff_drive,
    slip,
    slip_modulus,
)
from .mapping import (
    Catalog,
    DeploymentRecord,
    RiskZoning,
    TerrainClass,
    TerrainScale,
    build_catalog,
    default_risk_zoning,
    default_terrain_scale,
    deployment_record,
    render_map,
)
from .metrics import (
    ComparisonResult,
    DistortionSeries,
    SummaryStats,
    compare,
    distortion_series,
    kinetic_energy,
    mann_whitney,
    summarize,
)
from .sim import SlipModel, apply_slip, generate_commands, load_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AckermannCommand",
    "AlignedDataset",
    "AlignmentError",
    "BodyVelocity",
    "Catalog",
    "ComparisonResult",
    "DeploymentRecord",
    "DistortionSeries",
    "InsufficientDataError",
    "ParameterError",
    "ParseError",
    "PoseSample",
    "RiskZoning",
    "SlipModel",
    "SlipmeterError",
    "SummaryStats",
    "TerrainClass",
    "TerrainNotFoundError",
    "TerrainScale",
    "ValidationError",
    "VehicleSpec",
    "WheelCommand",
    "align",
    "apply_slip",
    "body_velocity_from_poses",
    "build_catalog",
    "compare",
    "default_risk_zoning",
    "default_terrain_scale",
    "deployment_record",
    "distortion_series",
    "generate_commands",
    "ideal_bicycle",
    "ideal_diff_drive",
    "kinetic_energy",
    "load_dataset",
    "load_scenario",
    "mann_whitney",
    "parse_log",
    "render_map",
    "run_scenario",
    "slip",
    "slip_modulus",
    "summarize",
    "wrap_angle",
    "__version__",
]
