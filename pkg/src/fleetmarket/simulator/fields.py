"""Ground-truth environment fields the synthetic fleet drives through.

Each field is a deterministic function of position, so the analytics
built on top of the generated data have a recoverable truth: a linear
temperature gradient with an optional Gaussian spot, per-region road
roughness driving vertical-acceleration noise, and a rain polygon that
switches the wipers on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TemperatureField:
    t0_degc: float = 10.0
    lat0: float = 50.0
    lon0: float = 8.0
    a_degc_per_deg: float = 1.0
    b_degc_per_deg: float = 1.0
    # optional Gaussian hot (amplitude > 0) or cold (< 0) spot
    spot_lat: float | None = None
    spot_lon: float | None = None
    spot_amplitude_degc: float = 0.0
    spot_sigma_deg: float = 0.05

    def value(self, lat: float, lon: float) -> float:
        t = (
            self.t0_degc
            + self.a_degc_per_deg * (lat - self.lat0)
            + self.b_degc_per_deg * (lon - self.lon0)
        )
        if self.spot_lat is not None and self.spot_lon is not None:
            d2 = (lat - self.spot_lat) ** 2 + (lon - self.spot_lon) ** 2
            t += self.spot_amplitude_degc * math.exp(-d2 / (2 * self.spot_sigma_deg**2))
        return t


@dataclass(frozen=True)
class RoughnessRegion:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    sigma_mps2: float

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat < self.lat_max and self.lon_min <= lon < self.lon_max


@dataclass(frozen=True)
class RoughnessField:
    default_sigma_mps2: float = 0.2
    regions: tuple[RoughnessRegion, ...] = ()

    def sigma(self, lat: float, lon: float) -> float:
        for region in self.regions:
            if region.contains(lat, lon):
                return region.sigma_mps2
        return self.default_sigma_mps2


def point_in_polygon(lat: float, lon: float, polygon: tuple[tuple[float, float], ...]) -> bool:
    """Even-odd rule; polygon as (lat, lon) vertices, implicitly closed."""
    inside = False
    n = len(polygon)
    for i in range(n):
        lat1, lon1 = polygon[i]
        lat2, lon2 = polygon[(i + 1) % n]
        if (lon1 > lon) != (lon2 > lon):
            t = (lon - lon1) / (lon2 - lon1)
            if lat < lat1 + t * (lat2 - lat1):
                inside = not inside
    return inside


@dataclass(frozen=True)
class GroundTruthFields:
    temperature: TemperatureField = field(default_factory=TemperatureField)
    roughness: RoughnessField = field(default_factory=RoughnessField)
    rain_polygon: tuple[tuple[float, float], ...] = ()

    def temperature_at(self, lat: float, lon: float) -> float:
        return self.temperature.value(lat, lon)

    def roughness_sigma_at(self, lat: float, lon: float) -> float:
        return self.roughness.sigma(lat, lon)

    def in_rain(self, lat: float, lon: float) -> bool:
        return bool(self.rain_polygon) and point_in_polygon(lat, lon, self.rain_polygon)
