"""Turning proprietary vehicle readings into harmonized, signed packages.

A mapping table translates opaque per-brand raw codes into catalog
signals via a linear raw*scale + offset map. Unknown raw codes are
dropped (and counted) rather than failing the vehicle: no signal is
mandatory. Out-of-range mapped values are clamped to the signal's valid
range and counted, which keeps sample counts conserved while flagging
bad mappings.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import (
    ChannelSpec,
    DataPackage,
    SIGNAL_CATALOG,
    SignalDefinition,
    SignalSample,
    SigningKey,
    VehicleContext,
    build_geo_histogram,
    build_histogram,
    downsample,
    make_package,
)


@dataclass(frozen=True, slots=True)
class ProprietaryReading:
    """A raw, brand-specific reading as it leaves the vehicle bus."""

    oem_id: str
    raw_signal_code: str
    raw_value: int
    timestamp_ms: int
    position: tuple[float, float] | None = None


@dataclass(frozen=True, slots=True)
class MappingEntry:
    signal_id: str
    scale: float
    offset: float
    unit_note: str = ""


@dataclass(frozen=True)
class MappingTable:
    """Per-brand translation of raw codes into catalog signals."""

    oem_id: str
    entries: Mapping[str, MappingEntry]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))

    @classmethod
    def from_file(cls, path: str | Path, oem_id: str | None = None) -> "MappingTable":
        tables = load_mapping_tables(path)
        if oem_id is not None:
            if oem_id not in tables:
                raise ValueError(f"no mapping rows for oem {oem_id!r} in {path}")
            return tables[oem_id]
        if len(tables) != 1:
            raise ValueError(f"{path} defines {sorted(tables)}; pass oem_id to pick one")
        return next(iter(tables.values()))


def load_mapping_tables(path: str | Path) -> dict[str, MappingTable]:
    """Parse the tabular mapping config.

    Whitespace-separated columns per line:
        oem_id  raw_code  signal_id  scale  offset  [unit note...]
    Blank lines and lines starting with '#' are skipped.
    """
    rows: dict[str, dict[str, MappingEntry]] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 5:
            raise ValueError(f"{path}:{lineno}: expected 5+ columns, got {len(parts)}")
        oem, raw_code, signal_id, scale, offset = parts[:5]
        note = " ".join(parts[5:])
        if signal_id not in SIGNAL_CATALOG:
            raise ValueError(f"{path}:{lineno}: unknown signal {signal_id!r}")
        table = rows.setdefault(oem, {})
        if raw_code in table:
            raise ValueError(f"{path}:{lineno}: duplicate raw code {raw_code!r} for {oem!r}")
        table[raw_code] = MappingEntry(signal_id, float(scale), float(offset), note)
    return {oem: MappingTable(oem, entries) for oem, entries in rows.items()}


class UnknownRawCodeError(KeyError):
    pass


def map_reading(
    reading: ProprietaryReading,
    table: MappingTable,
    catalog: Mapping[str, SignalDefinition] = SIGNAL_CATALOG,
    clamp_counter: Counter | None = None,
) -> tuple[str, SignalSample]:
    """Map one raw reading into a harmonized sample; returns (signal_id, sample)."""
    entry = table.entries.get(reading.raw_signal_code)
    if entry is None:
        raise UnknownRawCodeError(reading.raw_signal_code)
    value = reading.raw_value * entry.scale + entry.offset
    lo, hi = catalog[entry.signal_id].valid_range
    if value < lo:
        value = lo
        if clamp_counter is not None:
            clamp_counter[entry.signal_id] += 1
    elif value > hi:
        value = hi
        if clamp_counter is not None:
            clamp_counter[entry.signal_id] += 1
    return entry.signal_id, SignalSample(reading.timestamp_ms, value, reading.position)


def _align_tuples(
    samples_by_signal: Mapping[str, Sequence[SignalSample]], signal_ids: Sequence[str]
) -> list[tuple[tuple[float, ...], tuple[float, float] | None]]:
    """Join samples of several signals on exact timestamps.

    The joined tuple carries the position of the first signal's sample
    at that timestamp.
    """
    by_ts: list[dict[int, SignalSample]] = [
        {s.timestamp_ms: s for s in samples_by_signal[sid]} for sid in signal_ids
    ]
    common = set(by_ts[0])
    for d in by_ts[1:]:
        common &= set(d)
    out = []
    for ts in sorted(common):
        values = tuple(by_ts[j][ts].value for j in range(len(signal_ids)))
        out.append((values, by_ts[0][ts].position))
    return out


@dataclass
class HarmonizeStats:
    dropped_readings: int = 0
    clamped: Counter = field(default_factory=Counter)
    unpositioned_geo_samples: int = 0
    skipped_channels: int = 0


class Harmonizer:
    """Per-vehicle pipeline stage: raw readings in, signed packages out.

    Holds the per-(vehicle, channel) sequence counters; windows must be
    processed in time order for the emitted sequence numbers to stay
    consecutive. Counters can be restored after a restart from the
    vault's highest stored sequence number.
    """

    def __init__(
        self,
        table: MappingTable,
        signing_key: SigningKey,
        catalog: Mapping[str, SignalDefinition] = SIGNAL_CATALOG,
    ):
        self.table = table
        self.signing_key = signing_key
        self.catalog = catalog
        self.stats = HarmonizeStats()
        self._next_seq: dict[tuple[str, str], int] = {}

    def resume_sequences(self, highest: Mapping[tuple[str, str], int]) -> None:
        """Restore counters from the highest stored sequence numbers."""
        for key, seq in highest.items():
            self._next_seq[key] = seq + 1

    def next_sequence(self, vehicle_pseudonym: str, channel_id: str) -> int:
        key = (vehicle_pseudonym, channel_id)
        seq = self._next_seq.get(key, 0)
        self._next_seq[key] = seq + 1
        return seq

    def harmonize_window(
        self,
        readings: Iterable[ProprietaryReading],
        specs: Sequence[ChannelSpec],
        ctx: VehicleContext,
    ) -> list[DataPackage]:
        samples_by_signal: dict[str, list[SignalSample]] = {}
        for reading in readings:
            try:
                signal_id, sample = map_reading(
                    reading, self.table, self.catalog, self.stats.clamped
                )
            except UnknownRawCodeError:
                self.stats.dropped_readings += 1
                continue
            samples_by_signal.setdefault(signal_id, []).append(sample)
        for samples in samples_by_signal.values():
            samples.sort(key=lambda s: s.timestamp_ms)

        packages: list[DataPackage] = []
        for spec in specs:
            if not all(samples_by_signal.get(sid) for sid in spec.source_signals):
                self.stats.skipped_channels += 1
                continue
            if spec.channel_type == "time_series":
                samples = samples_by_signal[spec.source_signals[0]]
                assert spec.tsmc_rate_hz is not None and spec.tsmc_method is not None
                payload = downsample(samples, spec.tsmc_rate_hz, spec.tsmc_method).series
            else:
                joined = _align_tuples(samples_by_signal, spec.source_signals)
                if spec.channel_type == "histogram":
                    assert spec.bin_specs is not None
                    payload = build_histogram([values for values, _ in joined], spec.bin_specs)
                else:
                    positioned = [(v, p) for v, p in joined if p is not None]
                    self.stats.unpositioned_geo_samples += len(joined) - len(positioned)
                    if not positioned:
                        self.stats.skipped_channels += 1
                        continue
                    assert spec.bin_specs is not None and spec.geo_resolution_deg is not None
                    payload = build_geo_histogram(
                        positioned, spec.bin_specs, spec.geo_resolution_deg
                    )
            seq = self.next_sequence(ctx.vehicle_pseudonym, spec.channel_id)
            packages.append(make_package(spec, payload, ctx, self.signing_key, seq))
        return packages
