"""Provider SDK: marketplace access, fleet accumulation, reference analytics."""

from .accumulator import AccumulateResult, FleetAccumulator
from .analytics import (
    CellRoughness,
    CellWeather,
    RoadQualityMap,
    WeatherGrid,
    road_quality,
    weather_grid,
)
from .testdata import TEST_CHANNELS, generate_test_packages, fixture_key_registry, fixture_signing_key

__all__ = [
    "AccumulateResult",
    "CellRoughness",
    "CellWeather",
    "FleetAccumulator",
    "RoadQualityMap",
    "TEST_CHANNELS",
    "WeatherGrid",
    "generate_test_packages",
    "road_quality",
    "fixture_key_registry",
    "fixture_signing_key",
    "weather_grid",
]
