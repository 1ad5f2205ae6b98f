"""Harmonized signal vocabulary.

A signal is a brand-independent named quantity a vehicle can observe
(engine speed, outside temperature, ...). Every participating vehicle
maps its proprietary readings onto these definitions; no signal is
mandatory, so vehicles with sparse sensor fitment still participate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal

_TOKEN = re.compile(r"^[a-z][a-z0-9_]*$")

ValueKind = Literal["continuous", "discrete-enum"]


@dataclass(frozen=True, slots=True)
class SignalDefinition:
    """One harmonized signal: unit, value kind and admissible range."""

    signal_id: str
    display_name: str
    unit: str
    value_kind: ValueKind
    valid_range: tuple[float, float]
    enum_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not _TOKEN.match(self.signal_id):
            raise ValueError(f"signal_id {self.signal_id!r} is not a lowercase snake_case token")
        lo, hi = self.valid_range
        if self.value_kind == "continuous":
            if not lo < hi:
                raise ValueError(f"{self.signal_id}: valid_range min must be < max, got {self.valid_range}")
            if self.enum_labels is not None:
                raise ValueError(f"{self.signal_id}: continuous signals carry no enum labels")
        else:
            if self.enum_labels is None or len(self.enum_labels) < 2:
                raise ValueError(f"{self.signal_id}: discrete signals enumerate at least 2 labels")
            if lo != 0.0 or hi != float(len(self.enum_labels) - 1):
                raise ValueError(
                    f"{self.signal_id}: discrete valid_range must be (0, n_labels-1), got {self.valid_range}"
                )

    @property
    def is_discrete(self) -> bool:
        return self.value_kind == "discrete-enum"


@dataclass(frozen=True, slots=True)
class SignalSample:
    """A single harmonized observation, optionally geo-referenced."""

    timestamp_ms: int
    value: float
    position: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.position is not None:
            lat, lon = self.position
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValueError(f"position ({lat}, {lon}) outside WGS84 bounds")


def _continuous(signal_id: str, name: str, unit: str, lo: float, hi: float) -> SignalDefinition:
    return SignalDefinition(signal_id, name, unit, "continuous", (lo, hi))


def _discrete(signal_id: str, name: str, labels: tuple[str, ...]) -> SignalDefinition:
    return SignalDefinition(signal_id, name, "state", "discrete-enum", (0.0, float(len(labels) - 1)), labels)


# Shipped catalog. The real-world vocabulary is far larger; this subset
# covers every channel type plus the weather and road-quality analytics.
SIGNAL_CATALOG: dict[str, SignalDefinition] = {
    s.signal_id: s
    for s in (
        _continuous("vehicle_speed", "Vehicle speed", "km/h", 0.0, 300.0),
        _continuous("engine_speed", "Engine speed", "rpm", 0.0, 8000.0),
        _continuous("outside_temperature", "Outside temperature", "degC", -40.0, 60.0),
        _continuous("humidity", "Relative humidity", "%", 0.0, 100.0),
        _discrete("wiper_state", "Wiper state", ("off", "interval", "slow", "fast")),
        _discrete("rain_sensor", "Rain sensor level", ("dry", "drizzle", "rain", "heavy_rain")),
        _continuous("longitudinal_acceleration", "Longitudinal acceleration", "m/s^2", -15.0, 15.0),
        _continuous("lateral_acceleration", "Lateral acceleration", "m/s^2", -15.0, 15.0),
        _continuous("vertical_acceleration", "Vertical acceleration", "m/s^2", -15.0, 15.0),
        _continuous("suspension_height", "Suspension height", "mm", 0.0, 500.0),
        _continuous("fuel_level", "Fuel level", "%", 0.0, 100.0),
        _continuous("odometer", "Odometer", "km", 0.0, 2_000_000.0),
    )
}
