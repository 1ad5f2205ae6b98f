"""Catalog of available channels, folded from ingested package meta-data.

Every entry is an exact pure fold over the indexed metas: package and
vehicle counts, time coverage, an update frequency over a sliding 24 h
of simulated time, the geographic coverage at a fixed index resolution,
and an hour-of-day histogram.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..model import CellId, PackageMeta

CATALOG_INDEX_RESOLUTION_DEG = 0.1

_DAY_MS = 24 * 3600 * 1000
_HOUR_MS = 3600 * 1000


@dataclass(frozen=True)
class CatalogFilter:
    channel_id: str | None = None
    geo_box: tuple[float, float, float, float] | None = None  # lat_min, lat_max, lon_min, lon_max
    t_start_min_ms: int | None = None
    t_start_max_ms: int | None = None

    def matches(self, meta: PackageMeta) -> bool:
        if self.channel_id is not None and meta.channel_id != self.channel_id:
            return False
        if self.t_start_min_ms is not None and meta.t_start_ms < self.t_start_min_ms:
            return False
        if self.t_start_max_ms is not None and meta.t_start_ms > self.t_start_max_ms:
            return False
        if self.geo_box is not None:
            if meta.geo_bounds is None:
                return False
            if not boxes_intersect(meta.geo_bounds, self.geo_box):
                return False
        return True


def boxes_intersect(
    a: tuple[float, float, float, float], b: tuple[float, float, float, float]
) -> bool:
    a_lat_min, a_lat_max, a_lon_min, a_lon_max = a
    b_lat_min, b_lat_max, b_lon_min, b_lon_max = b
    return (
        a_lat_min <= b_lat_max
        and b_lat_min <= a_lat_max
        and a_lon_min <= b_lon_max
        and b_lon_min <= a_lon_max
    )


def cells_covering(
    bounds: tuple[float, float, float, float], resolution_deg: float
) -> set[CellId]:
    lat_min, lat_max, lon_min, lon_max = bounds
    first = CellId.from_position(lat_min, lon_min, resolution_deg)
    last = CellId.from_position(lat_max, lon_max, resolution_deg)
    return {
        CellId(row, col)
        for row in range(first.row, last.row + 1)
        for col in range(first.col, last.col + 1)
    }


@dataclass(frozen=True)
class CatalogEntry:
    channel_id: str
    package_count: int
    vehicle_count: int
    first_t_start_ms: int
    last_t_start_ms: int
    update_frequency_per_h: float
    geo_coverage: tuple[CellId, ...]
    time_histogram: tuple[int, ...]  # 24 hour-of-day buckets

    def to_obj(self) -> dict:
        return {
            "channel_id": self.channel_id,
            "package_count": self.package_count,
            "vehicle_count": self.vehicle_count,
            "first_t_start_ms": self.first_t_start_ms,
            "last_t_start_ms": self.last_t_start_ms,
            "update_frequency_per_h": self.update_frequency_per_h,
            "geo_coverage": [[c.row, c.col] for c in self.geo_coverage],
            "time_histogram": list(self.time_histogram),
        }


def fold_catalog(
    metas: Iterable[PackageMeta],
    now_ms: int,
    resolution_deg: float = CATALOG_INDEX_RESOLUTION_DEG,
    query: CatalogFilter | None = None,
) -> list[CatalogEntry]:
    """Fold metas into catalog entries; zero-count channels are omitted."""
    by_channel: dict[str, list[PackageMeta]] = {}
    for meta in metas:
        if query is not None and not query.matches(meta):
            continue
        by_channel.setdefault(meta.channel_id, []).append(meta)

    entries = []
    for channel_id in sorted(by_channel):
        group = by_channel[channel_id]
        starts = [m.t_start_ms for m in group]
        first, last = min(starts), max(starts)
        window_start = now_ms - _DAY_MS
        in_window = sum(1 for s in starts if s >= window_start)
        elapsed_ms = now_ms - max(first, window_start)
        frequency = in_window / (elapsed_ms / _HOUR_MS) if elapsed_ms > 0 else float(in_window)
        cells: set[CellId] = set()
        hours = [0] * 24
        for m in group:
            if m.geo_bounds is not None:
                cells |= cells_covering(m.geo_bounds, resolution_deg)
            hours[(m.t_start_ms // _HOUR_MS) % 24] += 1
        entries.append(
            CatalogEntry(
                channel_id=channel_id,
                package_count=len(group),
                vehicle_count=len({m.vehicle_pseudonym for m in group}),
                first_t_start_ms=first,
                last_t_start_ms=last,
                update_frequency_per_h=frequency,
                geo_coverage=tuple(sorted(cells)),
                time_histogram=tuple(hours),
            )
        )
    return entries


def parse_catalog_filter(obj: dict) -> CatalogFilter:
    """Build a filter from query-style fields, rejecting unknown ones."""
    allowed = {"channel_id", "lat_min", "lat_max", "lon_min", "lon_max", "t_start_min_ms", "t_start_max_ms"}
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValueError(f"unknown filter fields: {', '.join(unknown)}")
    box_fields = [obj.get(k) for k in ("lat_min", "lat_max", "lon_min", "lon_max")]
    box = None
    if any(v is not None for v in box_fields):
        if any(v is None for v in box_fields):
            raise ValueError("geo filter needs all of lat_min, lat_max, lon_min, lon_max")
        box = tuple(float(v) for v in box_fields)  # type: ignore[assignment]
    return CatalogFilter(
        channel_id=obj.get("channel_id"),
        geo_box=box,  # type: ignore[arg-type]
        t_start_min_ms=obj.get("t_start_min_ms"),
        t_start_max_ms=obj.get("t_start_max_ms"),
    )
