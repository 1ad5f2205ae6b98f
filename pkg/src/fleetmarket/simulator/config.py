"""Fleet run configuration, loaded from a JSON file.

The documented schema lives in the repository docs; everything a run
touches — fleet size, region, channels, sensor fitment, ground-truth
fields, consent schedule — is in the config, and the seed fully
determines all randomness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from ..model import SIGNAL_CATALOG, BinSpec, ChannelSpec, validate_channel_specs
from .fields import GroundTruthFields, RoughnessField, RoughnessRegion, TemperatureField
from .trajectory import Region


@dataclass(frozen=True)
class ConsentChange:
    at_s: float
    owner_index: int
    channel_id: str  # channel id or "*"
    granted: bool


@dataclass(frozen=True)
class FleetConfig:
    n_vehicles: int
    duration_s: int
    seed: int
    region: Region
    channels: tuple[ChannelSpec, ...]
    default_fitment: tuple[str, ...]
    fitment_overrides: dict[int, tuple[str, ...]] = field(default_factory=dict)
    fields: GroundTruthFields = field(default_factory=GroundTruthFields)
    consent_schedule: tuple[ConsentChange, ...] = ()
    initial_consent_granted: bool = True
    marketplace_endpoint: str | None = None
    vault_endpoint: str | None = None

    def __post_init__(self) -> None:
        if self.n_vehicles < 1:
            raise ValueError("n_vehicles must be >= 1")
        interval = self.reporting_interval_s
        if self.duration_s < interval:
            raise ValueError(
                f"duration_s {self.duration_s} is shorter than one reporting interval {interval}"
            )
        validate_channel_specs(self.channels, SIGNAL_CATALOG)
        for fitment in [self.default_fitment, *self.fitment_overrides.values()]:
            unknown = [s for s in fitment if s not in SIGNAL_CATALOG]
            if unknown:
                raise ValueError(f"fitment lists unknown signals: {unknown}")

    @property
    def reporting_interval_s(self) -> float:
        intervals = {spec.reporting_interval_s for spec in self.channels}
        if len(intervals) != 1:
            raise ValueError(
                "all channels in one run must share a reporting interval, "
                f"got {sorted(intervals)}"
            )
        return next(iter(intervals))

    def fitment_for(self, vehicle_index: int) -> tuple[str, ...]:
        return self.fitment_overrides.get(vehicle_index, self.default_fitment)

    @property
    def n_windows(self) -> int:
        return int(self.duration_s // self.reporting_interval_s)


def _channel_from_obj(obj: dict[str, Any]) -> ChannelSpec:
    bin_specs = obj.get("bin_specs")
    return ChannelSpec(
        channel_id=obj["channel_id"],
        channel_type=obj["channel_type"],
        source_signals=tuple(obj["source_signals"]),
        reporting_interval_s=float(obj.get("reporting_interval_s", 60.0)),
        quality_tier=obj.get("quality_tier", "standard"),
        tsmc_rate_hz=obj.get("tsmc_rate_hz"),
        tsmc_method=obj.get("tsmc_method"),
        bin_specs=tuple(BinSpec(tuple(b["edges"])) for b in bin_specs) if bin_specs else None,
        geo_resolution_deg=obj.get("geo_resolution_deg"),
    )


def _fields_from_obj(obj: dict[str, Any]) -> GroundTruthFields:
    temp_obj = obj.get("temperature", {})
    spot = temp_obj.get("spot") or {}
    temperature = TemperatureField(
        t0_degc=float(temp_obj.get("t0_degc", 10.0)),
        lat0=float(temp_obj.get("lat0", 50.0)),
        lon0=float(temp_obj.get("lon0", 8.0)),
        a_degc_per_deg=float(temp_obj.get("a_degc_per_deg", 1.0)),
        b_degc_per_deg=float(temp_obj.get("b_degc_per_deg", 1.0)),
        spot_lat=spot.get("lat"),
        spot_lon=spot.get("lon"),
        spot_amplitude_degc=float(spot.get("amplitude_degc", 0.0)),
        spot_sigma_deg=float(spot.get("sigma_deg", 0.05)),
    )
    rough_obj = obj.get("roughness", {})
    roughness = RoughnessField(
        default_sigma_mps2=float(rough_obj.get("default_sigma_mps2", 0.2)),
        regions=tuple(
            RoughnessRegion(
                lat_min=float(r["lat_min"]),
                lat_max=float(r["lat_max"]),
                lon_min=float(r["lon_min"]),
                lon_max=float(r["lon_max"]),
                sigma_mps2=float(r["sigma_mps2"]),
            )
            for r in rough_obj.get("regions", [])
        ),
    )
    rain = tuple((float(p[0]), float(p[1])) for p in obj.get("rain_polygon", []))
    return GroundTruthFields(temperature=temperature, roughness=roughness, rain_polygon=rain)


def config_from_obj(obj: dict[str, Any]) -> FleetConfig:
    region_obj = obj["region"]
    overrides = {
        int(index): tuple(fitment)
        for index, fitment in obj.get("fitment_overrides", {}).items()
    }
    schedule = tuple(
        ConsentChange(
            at_s=float(c["at_s"]),
            owner_index=int(c["owner_index"]),
            channel_id=c.get("channel_id", "*"),
            granted=bool(c["granted"]),
        )
        for c in obj.get("consent_schedule", [])
    )
    return FleetConfig(
        n_vehicles=int(obj["n_vehicles"]),
        duration_s=int(obj["duration_s"]),
        seed=int(obj["seed"]),
        region=Region(
            lat_min=float(region_obj["lat_min"]),
            lat_max=float(region_obj["lat_max"]),
            lon_min=float(region_obj["lon_min"]),
            lon_max=float(region_obj["lon_max"]),
        ),
        channels=tuple(_channel_from_obj(c) for c in obj["channels"]),
        default_fitment=tuple(obj.get("default_fitment", sorted(SIGNAL_CATALOG))),
        fitment_overrides=overrides,
        fields=_fields_from_obj(obj.get("fields", {})),
        consent_schedule=schedule,
        initial_consent_granted=bool(obj.get("initial_consent_granted", True)),
        marketplace_endpoint=obj.get("marketplace_endpoint"),
        vault_endpoint=obj.get("vault_endpoint"),
    )


def load_config(path: str | Path) -> FleetConfig:
    return config_from_obj(json.loads(Path(path).read_text()))
