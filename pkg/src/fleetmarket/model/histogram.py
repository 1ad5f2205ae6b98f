"""Histogram aggregation: multidimensional binning with explicit
under/overflow bins, plus the geo-gridded variant.

Bin membership is half-open [lo, hi); values below the first edge land
in the underflow bin, values at or above the last edge in the overflow
bin. Keeping out-of-range mass in dedicated bins makes count
conservation exact: the sum over all bins always equals the number of
input tuples. Histograms with identical bin layouts form a commutative
monoid under merge, with the all-zero histogram as identity.
"""

from __future__ import annotations

import hashlib
import math
from bisect import bisect_right
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import canonical

Position = tuple[float, float]


@dataclass(frozen=True, slots=True)
class BinSpec:
    """Strictly increasing edges defining n finite bins for one dimension."""

    edges: tuple[float, ...]

    def __post_init__(self) -> None:
        edges = tuple(float(e) for e in self.edges)
        if len(edges) < 2:
            raise ValueError("a bin spec needs at least two edges (one finite bin)")
        for a, b in zip(edges, edges[1:]):
            if not a < b:
                raise ValueError(f"edges must be strictly increasing, got {a} then {b}")
        if not all(math.isfinite(e) for e in edges):
            raise ValueError("edges must be finite")
        object.__setattr__(self, "edges", edges)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def midpoints(self) -> tuple[float, ...]:
        e = self.edges
        return tuple((e[i] + e[i + 1]) / 2.0 for i in range(len(e) - 1))

    def index(self, value: float) -> int:
        """Padded bin index: 0 = underflow, 1..n finite, n+1 = overflow."""
        if math.isnan(value):
            return self.n_bins + 1
        return bisect_right(self.edges, value)


def bin_spec_digest(bin_specs: Sequence[BinSpec]) -> str:
    """Short stable digest of a bin layout, used in mismatch diagnostics."""
    payload = canonical.encode([list(b.edges) for b in bin_specs])
    return hashlib.sha256(payload).hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class HistogramData:
    """Dense d-dimensional counts of shape (n1+2) x ... x (nd+2).

    Index 0 and -1 along each axis are the under/overflow bins. The
    constructor enforces shape and dtype; count conservation against
    total_samples is a producer guarantee checked by package validation,
    so that tampered payloads can be *reported* rather than crashing.
    """

    bin_specs: tuple[BinSpec, ...]
    counts: np.ndarray
    total_samples: int

    def __post_init__(self) -> None:
        specs = tuple(self.bin_specs)
        if not specs:
            raise ValueError("a histogram needs at least one dimension")
        expected = tuple(b.n_bins + 2 for b in specs)
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.shape != expected:
            raise ValueError(f"counts shape {arr.shape} does not match bin specs (want {expected})")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "bin_specs", specs)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "total_samples", int(self.total_samples))

    @property
    def dims(self) -> int:
        return len(self.bin_specs)

    @property
    def finite_counts(self) -> np.ndarray:
        """View of the counts without under/overflow bins."""
        return self.counts[tuple(slice(1, -1) for _ in self.bin_specs)]

    @property
    def overflow_mass(self) -> int:
        """Total samples sitting in under/overflow bins."""
        return int(self.counts.sum() - self.finite_counts.sum())

    def conserved(self) -> bool:
        return int(self.counts.sum()) == self.total_samples and not (self.counts < 0).any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HistogramData):
            return NotImplemented
        return (
            self.bin_specs == other.bin_specs
            and self.total_samples == other.total_samples
            and np.array_equal(self.counts, other.counts)
        )


def zero_histogram(bin_specs: Sequence[BinSpec]) -> HistogramData:
    shape = tuple(b.n_bins + 2 for b in bin_specs)
    return HistogramData(tuple(bin_specs), np.zeros(shape, dtype=np.int64), 0)


def build_histogram(tuples: Sequence[Sequence[float]], bin_specs: Sequence[BinSpec]) -> HistogramData:
    """Classify each d-tuple into exactly one cell of the padded grid."""
    specs = tuple(bin_specs)
    d = len(specs)
    for i, t in enumerate(tuples):
        if len(t) != d:
            raise ValueError(f"tuple at index {i} has arity {len(t)}, expected {d}")
    if not tuples:
        return zero_histogram(specs)
    arr = np.asarray(tuples, dtype=float).reshape(len(tuples), d)
    shape = tuple(b.n_bins + 2 for b in specs)
    indices = tuple(
        np.searchsorted(np.asarray(spec.edges), arr[:, j], side="right") for j, spec in enumerate(specs)
    )
    flat = np.ravel_multi_index(indices, shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    return HistogramData(specs, counts, len(tuples))


def merge_histograms(a: HistogramData, b: HistogramData) -> HistogramData:
    if a.bin_specs != b.bin_specs:
        raise ValueError(
            "cannot merge histograms with different bin specs: "
            f"{bin_spec_digest(a.bin_specs)} vs {bin_spec_digest(b.bin_specs)}"
        )
    return HistogramData(a.bin_specs, a.counts + b.counts, a.total_samples + b.total_samples)


@dataclass(frozen=True, slots=True, order=True)
class CellId:
    """Grid cell index; floor semantics put boundary points in the higher cell."""

    row: int
    col: int

    @classmethod
    def from_position(cls, lat_deg: float, lon_deg: float, resolution_deg: float) -> "CellId":
        return cls(math.floor(lat_deg / resolution_deg), math.floor(lon_deg / resolution_deg))

    def bounds(self, resolution_deg: float) -> tuple[float, float, float, float]:
        return (
            self.row * resolution_deg,
            (self.row + 1) * resolution_deg,
            self.col * resolution_deg,
            (self.col + 1) * resolution_deg,
        )

    def center(self, resolution_deg: float) -> Position:
        return ((self.row + 0.5) * resolution_deg, (self.col + 0.5) * resolution_deg)


@dataclass(frozen=True, eq=False)
class GeoHistogramData:
    """Histograms partitioned by grid cell; all cells share one bin layout."""

    geo_resolution_deg: float
    cells: Mapping[CellId, HistogramData]

    def __post_init__(self) -> None:
        if self.geo_resolution_deg <= 0:
            raise ValueError(f"geo_resolution_deg must be positive, got {self.geo_resolution_deg}")
        cells = dict(self.cells)
        specs = None
        for cell, hist in cells.items():
            if specs is None:
                specs = hist.bin_specs
            elif hist.bin_specs != specs:
                raise ValueError(
                    f"cell {cell} uses bin specs {bin_spec_digest(hist.bin_specs)}, "
                    f"other cells use {bin_spec_digest(specs)}"
                )
        object.__setattr__(self, "geo_resolution_deg", float(self.geo_resolution_deg))
        object.__setattr__(self, "cells", MappingProxyType(cells))

    @property
    def total_samples(self) -> int:
        return sum(h.total_samples for h in self.cells.values())

    @property
    def bin_specs(self) -> tuple[BinSpec, ...] | None:
        for hist in self.cells.values():
            return hist.bin_specs
        return None

    def merged(self) -> HistogramData | None:
        """Collapse the grid into a single flat histogram (None when empty)."""
        merged: HistogramData | None = None
        for cell in sorted(self.cells):
            hist = self.cells[cell]
            merged = hist if merged is None else merge_histograms(merged, hist)
        return merged

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GeoHistogramData):
            return NotImplemented
        return (
            self.geo_resolution_deg == other.geo_resolution_deg
            and dict(self.cells) == dict(other.cells)
        )


def build_geo_histogram(
    samples: Sequence[tuple[Sequence[float], Position | None]],
    bin_specs: Sequence[BinSpec],
    geo_resolution_deg: float,
) -> GeoHistogramData:
    """Partition positioned tuples by grid cell, then bin each cell."""
    missing = [i for i, (_, pos) in enumerate(samples) if pos is None]
    if missing:
        shown = ", ".join(str(i) for i in missing[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        raise ValueError(f"samples without position at indices {shown}{more}")
    by_cell: dict[CellId, list[Sequence[float]]] = {}
    for values, pos in samples:
        assert pos is not None
        cell = CellId.from_position(pos[0], pos[1], geo_resolution_deg)
        by_cell.setdefault(cell, []).append(values)
    cells = {cell: build_histogram(tuples, bin_specs) for cell, tuples in by_cell.items()}
    return GeoHistogramData(geo_resolution_deg, cells)


def merge_geo_histograms(a: GeoHistogramData, b: GeoHistogramData) -> GeoHistogramData:
    if a.geo_resolution_deg != b.geo_resolution_deg:
        raise ValueError(
            f"cannot merge geo histograms at different resolutions: "
            f"{a.geo_resolution_deg} vs {b.geo_resolution_deg}"
        )
    cells = dict(a.cells)
    for cell, hist in b.cells.items():
        cells[cell] = merge_histograms(cells[cell], hist) if cell in cells else hist
    return GeoHistogramData(a.geo_resolution_deg, cells)
