"""Time-series aggregation: rate reduction by keep-first or averaging.

Windows of 1000/target_rate_hz milliseconds are anchored at the first
sample's timestamp. Empty windows produce no output value; the occupancy
bitmap that accompanies the result records which windows held data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .signals import SignalSample

DownsampleMethod = Literal["keep-first", "average"]


@dataclass(frozen=True)
class TimeSeriesData:
    """Downsampled value sequence at a nominal rate starting at t0_ms."""

    rate_hz: float
    t0_ms: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.rate_hz <= 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class DownsampleResult:
    series: TimeSeriesData
    occupancy: tuple[bool, ...]

    @property
    def gap_windows(self) -> tuple[int, ...]:
        """Indices of windows that held no samples."""
        return tuple(i for i, filled in enumerate(self.occupancy) if not filled)


def downsample(
    samples: Sequence[SignalSample],
    target_rate_hz: float,
    method: DownsampleMethod,
) -> DownsampleResult:
    """Reduce a sorted sample sequence to one value per window.

    keep-first emits the earliest sample of each window, average the
    arithmetic mean. Rejects empty and unsorted input.
    """
    if target_rate_hz <= 0:
        raise ValueError(f"target_rate_hz must be positive, got {target_rate_hz}")
    if method not in ("keep-first", "average"):
        raise ValueError(f"unknown downsample method {method!r}")
    if not samples:
        raise ValueError("cannot downsample an empty sample sequence")

    t0 = samples[0].timestamp_ms
    prev = t0
    # window index -> (sum, count) for average, first value for keep-first
    filled: dict[int, float] = {}
    counts: dict[int, int] = {}
    for i, s in enumerate(samples):
        if s.timestamp_ms < prev:
            raise ValueError(
                f"samples not sorted by timestamp at index {i}: {s.timestamp_ms} < {prev}"
            )
        prev = s.timestamp_ms
        w = math.floor((s.timestamp_ms - t0) * target_rate_hz / 1000.0)
        if method == "keep-first":
            filled.setdefault(w, s.value)
        else:
            filled[w] = filled.get(w, 0.0) + s.value
            counts[w] = counts.get(w, 0) + 1

    last_window = max(filled)
    occupancy = tuple(w in filled for w in range(last_window + 1))
    if method == "average":
        values = tuple(filled[w] / counts[w] for w in sorted(filled))
    else:
        values = tuple(filled[w] for w in sorted(filled))
    series = TimeSeriesData(rate_hz=target_rate_hz, t0_ms=t0, values=values)
    return DownsampleResult(series=series, occupancy=occupancy)


def series_duration_ms(series: TimeSeriesData) -> float:
    """Nominal time span covered by the series."""
    return len(series.values) * 1000.0 / series.rate_hz


def iter_nominal_timestamps(series: TimeSeriesData) -> Iterable[float]:
    step = 1000.0 / series.rate_hz
    for i in range(len(series.values)):
        yield series.t0_ms + i * step
