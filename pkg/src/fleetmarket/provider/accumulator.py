"""Fleet accumulation on the provider side.

Push mode hands over packages one vehicle at a time; the provider folds
them into fleet-wide state. The fold is commutative and idempotent:
any delivery order and any number of re-deliveries of the same package
set produce the identical final state. Sequence gaps per (vehicle,
channel) are tracked so missing packages are visible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from ..model import (
    ChannelSpec,
    DataPackage,
    GeoHistogramData,
    HistogramData,
    KeyRegistry,
    TimeSeriesData,
    ValidationReport,
    canonical,
    merge_geo_histograms,
    merge_histograms,
    validate_package,
)
from ..model.serialization import payload_to_obj


@dataclass(frozen=True)
class AccumulateResult:
    accepted: bool
    reason: str = ""
    report: ValidationReport | None = None


class FleetAccumulator:
    def __init__(self, channel_specs: Mapping[str, ChannelSpec], key_registry: KeyRegistry):
        self.channel_specs = dict(channel_specs)
        self.key_registry = key_registry
        self.seen_package_ids: set[str] = set()
        self.rejected: list[tuple[str, str]] = []  # (package_id, reason)
        # time series segments keyed for order independence
        self._series: dict[str, dict[tuple[str, int], TimeSeriesData]] = {}
        self._histograms: dict[str, HistogramData] = {}
        self._geo: dict[str, GeoHistogramData] = {}
        self._sequences: dict[tuple[str, str], set[int]] = {}  # (vehicle, channel)

    def accumulate(self, pkg: DataPackage) -> AccumulateResult:
        meta = pkg.meta
        if meta.channel_id not in self.channel_specs:
            result = AccumulateResult(False, f"unknown channel {meta.channel_id!r}")
            self.rejected.append((meta.package_id, result.reason))
            return result
        report = validate_package(pkg, self.key_registry)
        if not report.valid:
            reason = f"validation failed: {', '.join(report.failed())}"
            self.rejected.append((meta.package_id, reason))
            return AccumulateResult(False, reason, report)
        if meta.package_id in self.seen_package_ids:
            return AccumulateResult(True, "duplicate ignored")
        self.seen_package_ids.add(meta.package_id)
        self._sequences.setdefault((meta.vehicle_pseudonym, meta.channel_id), set()).add(
            meta.sequence_no
        )
        payload = pkg.payload
        channel = meta.channel_id
        if isinstance(payload, TimeSeriesData):
            self._series.setdefault(channel, {})[(meta.vehicle_pseudonym, meta.sequence_no)] = payload
        elif isinstance(payload, HistogramData):
            current = self._histograms.get(channel)
            self._histograms[channel] = (
                payload if current is None else merge_histograms(current, payload)
            )
        else:
            assert isinstance(payload, GeoHistogramData)
            current = self._geo.get(channel)
            self._geo[channel] = (
                payload if current is None else merge_geo_histograms(current, payload)
            )
        return AccumulateResult(True)

    # -- views ----------------------------------------------------------------

    def histogram(self, channel_id: str) -> HistogramData | None:
        return self._histograms.get(channel_id)

    def geo_histogram(self, channel_id: str) -> GeoHistogramData | None:
        return self._geo.get(channel_id)

    def series_segments(self, channel_id: str, vehicle: str) -> list[TimeSeriesData]:
        segments = self._series.get(channel_id, {})
        keys = sorted(k for k in segments if k[0] == vehicle)
        return [segments[k] for k in keys]

    def concatenated_values(self, channel_id: str, vehicle: str) -> list[float]:
        out: list[float] = []
        for segment in self.series_segments(channel_id, vehicle):
            out.extend(segment.values)
        return out

    def vehicles(self, channel_id: str) -> list[str]:
        vehicles = {v for (v, c) in self._sequences if c == channel_id}
        return sorted(vehicles)

    def gap_report(self) -> dict[tuple[str, str], tuple[int, ...]]:
        """Missing sequence numbers per (vehicle, channel)."""
        report: dict[tuple[str, str], tuple[int, ...]] = {}
        for key, seqs in sorted(self._sequences.items()):
            missing = tuple(sorted(set(range(min(seqs), max(seqs) + 1)) - seqs))
            if missing:
                report[key] = missing
        return report

    # -- equality & sharding ----------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical-able view of the accumulated state."""
        return {
            "seen": sorted(self.seen_package_ids),
            "series": {
                channel: {
                    f"{vehicle}/{seq}": payload_to_obj(series)
                    for (vehicle, seq), series in sorted(segments.items())
                }
                for channel, segments in sorted(self._series.items())
            },
            "histograms": {
                channel: payload_to_obj(hist) for channel, hist in sorted(self._histograms.items())
            },
            "geo": {channel: payload_to_obj(geo) for channel, geo in sorted(self._geo.items())},
            "sequences": {
                f"{vehicle}/{channel}": sorted(seqs)
                for (vehicle, channel), seqs in sorted(self._sequences.items())
            },
        }

    def state_fingerprint(self) -> str:
        return hashlib.sha256(canonical.encode(self.snapshot())).hexdigest()

    def merge(self, other: "FleetAccumulator") -> "FleetAccumulator":
        """Combine two shards that accumulated disjoint package sets.

        Histogram mass cannot be un-merged, so overlapping shards are
        rejected rather than silently double counted.
        """
        overlap = self.seen_package_ids & other.seen_package_ids
        if overlap:
            raise ValueError(f"shards overlap on {len(overlap)} packages; shard disjointly")
        merged = FleetAccumulator(self.channel_specs | other.channel_specs, self.key_registry)
        merged.seen_package_ids = self.seen_package_ids | other.seen_package_ids
        merged._series = {c: dict(s) for c, s in self._series.items()}
        merged._histograms = dict(self._histograms)
        merged._geo = dict(self._geo)
        merged._sequences = {k: set(v) for k, v in self._sequences.items()}
        for channel, segments in other._series.items():
            merged._series.setdefault(channel, {}).update(segments)
        for key, seqs in other._sequences.items():
            merged._sequences.setdefault(key, set()).update(seqs)
        for channel, hist in other._histograms.items():
            mine = merged._histograms.get(channel)
            merged._histograms[channel] = hist if mine is None else merge_histograms(mine, hist)
        for channel, geo in other._geo.items():
            mine_geo = merged._geo.get(channel)
            merged._geo[channel] = geo if mine_geo is None else merge_geo_histograms(mine_geo, geo)
        return merged
