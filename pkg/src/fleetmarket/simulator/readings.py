"""Synthetic proprietary readings for one simulated OEM.

The generator produces raw integer bus values that the harmonizer maps
back into physical units through SIM_MAPPING — the same round trip real
vehicle data takes. Signal models are minimal but correlated: engine
speed tracks vehicle speed, vertical acceleration noise follows the
roughness field, wipers follow the rain polygon, temperature follows
the temperature field plus sensor noise.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from ..harmonizer import MappingEntry, MappingTable, ProprietaryReading
from .fields import GroundTruthFields
from .trajectory import Trajectory, vehicle_rng

SIM_OEM_ID = "simfleet"

# raw code -> (signal, scale, offset); value = raw * scale + offset
_MAPPING_ROWS: dict[str, MappingEntry] = {
    "can_0x0d0": MappingEntry("vehicle_speed", 0.01, 0.0, "centi-km/h"),
    "can_0x0c6": MappingEntry("engine_speed", 0.25, 0.0, "quarter-rpm"),
    "can_0x2a4": MappingEntry("outside_temperature", 0.01, -50.0, "centi-degC biased"),
    "can_0x310": MappingEntry("humidity", 0.5, 0.0, "half-percent"),
    "can_0x1b0": MappingEntry("wiper_state", 1.0, 0.0, "enum ordinal"),
    "can_0x1b1": MappingEntry("rain_sensor", 1.0, 0.0, "enum ordinal"),
    "can_0x3e0": MappingEntry("longitudinal_acceleration", 0.001, 0.0, "milli-m/s^2"),
    "can_0x3e1": MappingEntry("lateral_acceleration", 0.001, 0.0, "milli-m/s^2"),
    "can_0x3e2": MappingEntry("vertical_acceleration", 0.001, 0.0, "milli-m/s^2"),
    "can_0x450": MappingEntry("suspension_height", 0.1, 0.0, "tenth-mm"),
    "can_0x481": MappingEntry("fuel_level", 0.1, 0.0, "tenth-percent"),
    "can_0x482": MappingEntry("odometer", 0.01, 0.0, "centi-km"),
}

SIM_MAPPING = MappingTable(SIM_OEM_ID, _MAPPING_ROWS)

_RAW_CODE_BY_SIGNAL = {entry.signal_id: code for code, entry in _MAPPING_ROWS.items()}

# per-signal generation rate
_RATE_HZ = {
    "vehicle_speed": 100,
    "engine_speed": 100,
    "vertical_acceleration": 100,
    "longitudinal_acceleration": 100,
    "lateral_acceleration": 100,
    "suspension_height": 10,
    "outside_temperature": 1,
    "humidity": 1,
    "wiper_state": 1,
    "rain_sensor": 1,
    "fuel_level": 1,
    "odometer": 1,
}

ENGINE_IDLE_RPM = 800.0
ENGINE_RPM_PER_KMH = 40.0
TEMPERATURE_NOISE_DEGC = 0.3


def _raw(signal_id: str, value: float) -> int:
    entry = _MAPPING_ROWS[_RAW_CODE_BY_SIGNAL[signal_id]]
    return round((value - entry.offset) / entry.scale)


def _reading(signal_id, value, timestamp_ms, position) -> ProprietaryReading:
    return ProprietaryReading(
        oem_id=SIM_OEM_ID,
        raw_signal_code=_RAW_CODE_BY_SIGNAL[signal_id],
        raw_value=_raw(signal_id, value),
        timestamp_ms=timestamp_ms,
        position=position,
    )


def mapping_table_text() -> str:
    """The default mapping table in its on-disk tabular form."""
    lines = ["# oem_id  raw_code  signal_id  scale  offset  note"]
    for code, entry in sorted(_MAPPING_ROWS.items()):
        lines.append(
            f"{SIM_OEM_ID}  {code}  {entry.signal_id}  {entry.scale}  {entry.offset}  {entry.unit_note}"
        )
    return "\n".join(lines) + "\n"


def generate_window_readings(
    trajectory: Trajectory,
    fitment: Sequence[str],
    fields: GroundTruthFields,
    seed: int,
    window_start_s: int,
    window_end_s: int,
) -> list[ProprietaryReading]:
    """Readings for one reporting window [start, end) of one vehicle.

    Deterministic per (seed, vehicle, second): every simulated second
    draws from its own child stream, so any window partitioning of the
    same run yields byte-identical readings.
    """
    fitted = set(fitment)
    out: list[ProprietaryReading] = []
    for t_s in range(window_start_s, min(window_end_s, trajectory.duration_s)):
        rng = vehicle_rng(seed, trajectory.vehicle_index, stream=1000 + t_s)
        pos = trajectory.positions[t_s]
        speed_kmh = trajectory.speeds_mps[t_s] * 3.6
        base_ms = t_s * 1000

        if "vehicle_speed" in fitted:
            noise = rng.normal(0, 0.3, 100)
            for j in range(100):
                out.append(
                    _reading("vehicle_speed", max(0.0, speed_kmh + noise[j]), base_ms + j * 10, pos)
                )
        if "engine_speed" in fitted:
            rpm = ENGINE_IDLE_RPM + speed_kmh * ENGINE_RPM_PER_KMH
            noise = rng.normal(0, 10.0, 100)
            for j in range(100):
                out.append(
                    _reading("engine_speed", max(0.0, rpm + noise[j]), base_ms + j * 10, pos)
                )
        if "vertical_acceleration" in fitted:
            sigma = fields.roughness_sigma_at(*pos)
            accel = rng.normal(0.0, sigma, 100)
            for j in range(100):
                out.append(_reading("vertical_acceleration", accel[j], base_ms + j * 10, pos))
        if "longitudinal_acceleration" in fitted:
            accel = rng.normal(0.0, 0.3, 100)
            for j in range(100):
                out.append(_reading("longitudinal_acceleration", accel[j], base_ms + j * 10, pos))
        if "lateral_acceleration" in fitted:
            accel = rng.normal(0.0, 0.2, 100)
            for j in range(100):
                out.append(_reading("lateral_acceleration", accel[j], base_ms + j * 10, pos))
        if "suspension_height" in fitted:
            sigma = fields.roughness_sigma_at(*pos)
            heights = 250.0 + rng.normal(0.0, 20.0 * sigma, 10)
            for j in range(10):
                out.append(_reading("suspension_height", heights[j], base_ms + j * 100, pos))
        if "outside_temperature" in fitted:
            temp = fields.temperature_at(*pos) + rng.normal(0, TEMPERATURE_NOISE_DEGC)
            out.append(_reading("outside_temperature", temp, base_ms, pos))
        if "humidity" in fitted:
            humidity = 60.0 + rng.normal(0, 2.0)
            out.append(_reading("humidity", min(100.0, max(0.0, humidity)), base_ms, pos))
        raining = fields.in_rain(*pos)
        if "wiper_state" in fitted:
            out.append(_reading("wiper_state", 2.0 if raining else 0.0, base_ms, pos))
        if "rain_sensor" in fitted:
            out.append(_reading("rain_sensor", 2.0 if raining else 0.0, base_ms, pos))
        if "fuel_level" in fitted:
            level = max(0.0, 80.0 - trajectory.cumulative_km[t_s] * 0.08)
            out.append(_reading("fuel_level", level, base_ms, pos))
        if "odometer" in fitted:
            out.append(_reading("odometer", 10_000.0 + trajectory.cumulative_km[t_s], base_ms, pos))
    return out


def generate_readings(
    trajectory: Trajectory,
    fitment: Sequence[str],
    fields: GroundTruthFields,
    seed: int,
) -> Iterator[ProprietaryReading]:
    """All readings of one vehicle over its whole trajectory."""
    for t_s in range(trajectory.duration_s):
        yield from generate_window_readings(trajectory, fitment, fields, seed, t_s, t_s + 1)
