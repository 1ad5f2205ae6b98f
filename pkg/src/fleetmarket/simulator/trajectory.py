"""Random-waypoint trajectories at 1 Hz inside a bounding box.

Geometry stays in plain degree space (no projection); distances use a
flat 111 km/degree conversion, consistently on both axes, which is all
the desk-scale analytics need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KM_PER_DEG = 111.0


@dataclass(frozen=True)
class Region:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self) -> None:
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("region box is degenerate")

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


@dataclass(frozen=True)
class Trajectory:
    vehicle_index: int
    positions: tuple[tuple[float, float], ...]  # one per second
    speeds_mps: tuple[float, ...]
    cumulative_km: tuple[float, ...]

    @property
    def duration_s(self) -> int:
        return len(self.positions)

    def path_length_km(self) -> float:
        return self.cumulative_km[-1] if self.cumulative_km else 0.0


def vehicle_rng(seed: int, vehicle_index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, vehicle_index, stream]))


def generate_trajectory(
    seed: int,
    vehicle_index: int,
    region: Region,
    duration_s: int,
    speed_min_mps: float = 8.0,
    speed_max_mps: float = 28.0,
) -> Trajectory:
    """Piecewise-constant-speed waypoint path, deterministic per (seed, index)."""
    rng = vehicle_rng(seed, vehicle_index, stream=1)
    lat = rng.uniform(region.lat_min, region.lat_max)
    lon = rng.uniform(region.lon_min, region.lon_max)
    target_lat = rng.uniform(region.lat_min, region.lat_max)
    target_lon = rng.uniform(region.lon_min, region.lon_max)
    speed = rng.uniform(speed_min_mps, speed_max_mps)

    positions = []
    speeds = []
    cumulative = []
    travelled_km = 0.0
    for _ in range(duration_s):
        positions.append((lat, lon))
        speeds.append(speed)
        step_deg = speed / (KM_PER_DEG * 1000.0)
        dlat = target_lat - lat
        dlon = target_lon - lon
        dist = math.hypot(dlat, dlon)
        while dist <= step_deg:
            # waypoint reached within this second: pick the next leg
            lat, lon = target_lat, target_lon
            step_deg -= dist
            target_lat = rng.uniform(region.lat_min, region.lat_max)
            target_lon = rng.uniform(region.lon_min, region.lon_max)
            speed = rng.uniform(speed_min_mps, speed_max_mps)
            dlat = target_lat - lat
            dlon = target_lon - lon
            dist = math.hypot(dlat, dlon)
        lat += dlat / dist * step_deg
        lon += dlon / dist * step_deg
        travelled_km += speeds[-1] / 1000.0
        cumulative.append(travelled_km)
    return Trajectory(
        vehicle_index=vehicle_index,
        positions=tuple(positions),
        speeds_mps=tuple(speeds),
        cumulative_km=tuple(cumulative),
    )
