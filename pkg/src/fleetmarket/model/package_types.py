"""Package and meta-data value types.

Kept separate from the build/validate logic so the wire schema can
import the types without a circular dependency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

from .histogram import GeoHistogramData, HistogramData
from .timeseries import TimeSeriesData

Payload = Union[TimeSeriesData, HistogramData, GeoHistogramData]
PrivacyLevel = Literal["private", "fleet", "public"]


@dataclass(frozen=True)
class PackageMeta:
    """Descriptive meta-data accompanying an aggregated payload.

    The statistics (min/max/avg) preview the payload without opening it;
    checksum, signature and sequence number let consumers verify
    integrity and completeness; owner and stakeholders capture who has
    rights to the data and at which privacy level it may circulate.
    """

    package_id: str
    channel_id: str
    vehicle_pseudonym: str
    t_start_ms: int
    t_end_ms: int
    mileage_start_km: float
    mileage_end_km: float
    geo_bounds: tuple[float, float, float, float] | None
    stat_min: float
    stat_max: float
    stat_avg: float
    sequence_no: int
    checksum: str
    signature: str
    owner_id: str
    stakeholders: tuple[str, ...]
    privacy_level: PrivacyLevel

    def __post_init__(self) -> None:
        object.__setattr__(self, "mileage_start_km", float(self.mileage_start_km))
        object.__setattr__(self, "mileage_end_km", float(self.mileage_end_km))
        object.__setattr__(self, "stat_min", float(self.stat_min))
        object.__setattr__(self, "stat_max", float(self.stat_max))
        object.__setattr__(self, "stat_avg", float(self.stat_avg))
        object.__setattr__(self, "stakeholders", tuple(self.stakeholders))
        if self.geo_bounds is not None:
            object.__setattr__(self, "geo_bounds", tuple(float(b) for b in self.geo_bounds))


@dataclass(frozen=True)
class DataPackage:
    """The exchangeable unit: meta-data plus exactly one aggregated payload."""

    meta: PackageMeta
    payload: Payload


@dataclass(frozen=True)
class VehicleContext:
    """Per-window producer context used when packaging aggregated data."""

    vehicle_pseudonym: str
    owner_id: str
    t_start_ms: int
    t_end_ms: int
    mileage_start_km: float
    mileage_end_km: float
    positions: tuple[tuple[float, float], ...] | None = None
    stakeholders: tuple[str, ...] = ()
    privacy_level: PrivacyLevel = "private"

    def __post_init__(self) -> None:
        if self.t_start_ms > self.t_end_ms:
            raise ValueError(f"t_start_ms {self.t_start_ms} > t_end_ms {self.t_end_ms}")
        if self.mileage_start_km > self.mileage_end_km:
            raise ValueError(
                f"mileage_start_km {self.mileage_start_km} > mileage_end_km {self.mileage_end_km}"
            )
        if self.positions is not None:
            object.__setattr__(self, "positions", tuple(tuple(p) for p in self.positions))
        object.__setattr__(self, "stakeholders", tuple(self.stakeholders))

    def bounds(self) -> tuple[float, float, float, float] | None:
        if not self.positions:
            return None
        lats = [p[0] for p in self.positions]
        lons = [p[1] for p in self.positions]
        return (min(lats), max(lats), min(lons), max(lons))
