"""Synthetic fleet: trajectories, readings, and the pipeline runner."""

from .config import ConsentChange, FleetConfig, config_from_obj, load_config
from .fields import (
    GroundTruthFields,
    RoughnessField,
    RoughnessRegion,
    TemperatureField,
    point_in_polygon,
)
from .readings import (
    SIM_MAPPING,
    SIM_OEM_ID,
    generate_readings,
    generate_window_readings,
    mapping_table_text,
)
from .runner import (
    HttpVaultSink,
    InProcessStack,
    RunReport,
    corpus_digest,
    fleet_signing_key,
    owner_id_for,
    pseudonym_for,
    run_fleet,
)
from .trajectory import KM_PER_DEG, Region, Trajectory, generate_trajectory, vehicle_rng

__all__ = [
    "ConsentChange",
    "FleetConfig",
    "GroundTruthFields",
    "HttpVaultSink",
    "InProcessStack",
    "KM_PER_DEG",
    "Region",
    "RoughnessField",
    "RoughnessRegion",
    "RunReport",
    "SIM_MAPPING",
    "SIM_OEM_ID",
    "TemperatureField",
    "Trajectory",
    "config_from_obj",
    "corpus_digest",
    "fleet_signing_key",
    "generate_readings",
    "generate_trajectory",
    "generate_window_readings",
    "load_config",
    "mapping_table_text",
    "owner_id_for",
    "point_in_polygon",
    "pseudonym_for",
    "run_fleet",
    "vehicle_rng",
]
