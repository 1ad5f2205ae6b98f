"""Reference analytics over accumulated fleet data.

Weather: per grid cell, the count-weighted bin-midpoint mean of an
outside-temperature geo histogram. Vehicles act as moving thermometers,
filling the gaps between fixed observation stations.

Road quality: per grid cell, the count-weighted standard deviation of a
vertical-acceleration geo histogram. Rough surface excites the
suspension, widening the acceleration distribution, so cells rank by
dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import CellId, GeoHistogramData, HistogramData
from .accumulator import FleetAccumulator


@dataclass(frozen=True, slots=True)
class CellWeather:
    mean_temp_degc: float
    sample_count: int


@dataclass(frozen=True)
class WeatherGrid:
    resolution_deg: float
    cells: dict[CellId, CellWeather]
    excluded_samples: int = 0

    def to_rows(self) -> list[dict]:
        return [
            {
                "row": cell.row,
                "col": cell.col,
                "lat_center": cell.center(self.resolution_deg)[0],
                "lon_center": cell.center(self.resolution_deg)[1],
                "mean_temp_degc": stat.mean_temp_degc,
                "sample_count": stat.sample_count,
            }
            for cell, stat in sorted(self.cells.items())
        ]


@dataclass(frozen=True, slots=True)
class CellRoughness:
    roughness_score: float
    sample_count: int


@dataclass(frozen=True)
class RoadQualityMap:
    resolution_deg: float
    cells: dict[CellId, CellRoughness]
    overflow_samples: int = 0  # mass folded into the extreme finite bins

    def ranked(self) -> list[tuple[CellId, CellRoughness]]:
        return sorted(self.cells.items(), key=lambda kv: (-kv[1].roughness_score, kv[0]))

    def to_rows(self) -> list[dict]:
        return [
            {
                "row": cell.row,
                "col": cell.col,
                "lat_center": cell.center(self.resolution_deg)[0],
                "lon_center": cell.center(self.resolution_deg)[1],
                "roughness_score": stat.roughness_score,
                "sample_count": stat.sample_count,
            }
            for cell, stat in self.ranked()
        ]


def _require_geo_channel(
    acc: FleetAccumulator, channel_id: str, signal_id: str
) -> GeoHistogramData | None:
    spec = acc.channel_specs.get(channel_id)
    if spec is None:
        raise ValueError(f"unknown channel {channel_id!r}")
    if spec.channel_type != "geo_histogram" or spec.source_signals != (signal_id,):
        raise ValueError(
            f"channel {channel_id!r} is not a geo histogram over {signal_id!r}"
        )
    return acc.geo_histogram(channel_id)


def _finite_marginal(hist: HistogramData) -> tuple[np.ndarray, np.ndarray, int, int]:
    """(midpoints, finite counts, finite total, excluded) of a 1-D histogram."""
    finite = hist.finite_counts
    mids = np.asarray(hist.bin_specs[0].midpoints())
    total = int(finite.sum())
    excluded = int(hist.counts.sum()) - total
    return mids, finite, total, excluded


def weather_grid(acc: FleetAccumulator, channel_id: str) -> WeatherGrid:
    geo = _require_geo_channel(acc, channel_id, "outside_temperature")
    spec = acc.channel_specs[channel_id]
    resolution = spec.geo_resolution_deg or 0.0
    if geo is None:
        return WeatherGrid(resolution, {})
    cells: dict[CellId, CellWeather] = {}
    excluded_total = 0
    for cell, hist in geo.cells.items():
        mids, finite, total, excluded = _finite_marginal(hist)
        excluded_total += excluded
        if total == 0:
            continue
        mean = float((finite * mids).sum()) / total
        cells[cell] = CellWeather(mean_temp_degc=mean, sample_count=total)
    return WeatherGrid(geo.geo_resolution_deg, cells, excluded_total)


def road_quality(acc: FleetAccumulator, channel_id: str) -> RoadQualityMap:
    geo = _require_geo_channel(acc, channel_id, "vertical_acceleration")
    spec = acc.channel_specs[channel_id]
    resolution = spec.geo_resolution_deg or 0.0
    if geo is None:
        return RoadQualityMap(resolution, {})
    cells: dict[CellId, CellRoughness] = {}
    overflow_total = 0
    for cell, hist in geo.cells.items():
        mids, finite, total, _ = _finite_marginal(hist)
        counts = finite.astype(np.int64).copy()
        # out-of-range mass is real signal here; fold it onto the extreme bins
        under = int(hist.counts[0])
        over = int(hist.counts[-1])
        counts[0] += under
        counts[-1] += over
        overflow_total += under + over
        n = int(counts.sum())
        if n == 0:
            continue
        mean = float((counts * mids).sum()) / n
        var = float((counts * (mids - mean) ** 2).sum()) / n
        cells[cell] = CellRoughness(roughness_score=math.sqrt(var), sample_count=n)
    return RoadQualityMap(geo.geo_resolution_deg, cells, overflow_total)
