"""Measurement channel specifications.

A channel defines how one or more signals are aggregated into packages:
time series (rate-reduced sequence), histogram (value distribution,
possibly multidimensional) or geo histogram (distribution per grid
cell). Several channels may aggregate the same signal, e.g. a standard
and a high quality tier side by side.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .histogram import BinSpec
from .signals import SignalDefinition

_TOKEN = re.compile(r"^[a-z][a-z0-9_\-]*$")

ChannelType = Literal["time_series", "histogram", "geo_histogram"]
QualityTier = Literal["standard", "high"]


@dataclass(frozen=True)
class ChannelSpec:
    channel_id: str
    channel_type: ChannelType
    source_signals: tuple[str, ...]
    reporting_interval_s: float
    quality_tier: QualityTier = "standard"
    tsmc_rate_hz: float | None = None
    tsmc_method: Literal["keep-first", "average"] | None = None
    bin_specs: tuple[BinSpec, ...] | None = None
    geo_resolution_deg: float | None = None

    def __post_init__(self) -> None:
        if not _TOKEN.match(self.channel_id):
            raise ValueError(f"channel_id {self.channel_id!r} is not a lowercase token")
        if self.reporting_interval_s <= 0:
            raise ValueError("reporting_interval_s must be positive")
        object.__setattr__(self, "source_signals", tuple(self.source_signals))
        if self.channel_type == "time_series":
            if len(self.source_signals) != 1:
                raise ValueError("time_series channels aggregate exactly one signal")
            if self.tsmc_rate_hz is None or self.tsmc_rate_hz <= 0:
                raise ValueError("time_series channels need tsmc_rate_hz > 0")
            if self.tsmc_method not in ("keep-first", "average"):
                raise ValueError("time_series channels need tsmc_method keep-first or average")
            if self.bin_specs is not None or self.geo_resolution_deg is not None:
                raise ValueError("time_series channels carry no bin specs or geo resolution")
        elif self.channel_type in ("histogram", "geo_histogram"):
            if not self.source_signals:
                raise ValueError("histogram channels need at least one source signal")
            if self.bin_specs is None or len(self.bin_specs) != len(self.source_signals):
                raise ValueError("histogram channels need one bin spec per source signal")
            object.__setattr__(self, "bin_specs", tuple(self.bin_specs))
            if self.tsmc_rate_hz is not None or self.tsmc_method is not None:
                raise ValueError("histogram channels carry no time-series parameters")
            if self.channel_type == "geo_histogram":
                if self.geo_resolution_deg is None or self.geo_resolution_deg <= 0:
                    raise ValueError("geo_histogram channels need geo_resolution_deg > 0")
            elif self.geo_resolution_deg is not None:
                raise ValueError("plain histogram channels carry no geo resolution")
        else:
            raise ValueError(f"unknown channel_type {self.channel_type!r}")


def validate_channel_specs(
    specs: Sequence[ChannelSpec], catalog: Mapping[str, SignalDefinition]
) -> dict[str, ChannelSpec]:
    """Check uniqueness and signal resolution; returns a registry by id."""
    registry: dict[str, ChannelSpec] = {}
    for spec in specs:
        if spec.channel_id in registry:
            raise ValueError(f"duplicate channel_id {spec.channel_id!r}")
        unknown = [s for s in spec.source_signals if s not in catalog]
        if unknown:
            raise ValueError(f"channel {spec.channel_id!r} references unknown signals: {unknown}")
        registry[spec.channel_id] = spec
    return registry
