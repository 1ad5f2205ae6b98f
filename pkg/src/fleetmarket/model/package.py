"""Building and validating data packages.

make_package computes the meta-data preview statistics, the payload
checksum and a detached signature; validate_package re-derives all of
it and reports every check independently instead of raising, so a
single corrupted byte shows up as the precise check it breaks.
"""

from __future__ import annotations

import hashlib
import math
import uuid
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .channels import ChannelSpec
from .histogram import GeoHistogramData, HistogramData
from .package_types import DataPackage, PackageMeta, Payload, VehicleContext
from .serialization import payload_bytes, payload_kind, signed_bytes
from .signing import KeyRegistry, PublicKey, SigningKey, verify_with_key
from .timeseries import TimeSeriesData

# Namespace for deterministic package ids: the same producer emitting the
# same (vehicle, channel, sequence) always mints the same id.
_PACKAGE_ID_NAMESPACE = uuid.UUID("6dfa5d0e-32c0-45a5-9ef5-9c1f1d6a2b7e")

_KIND_BY_CHANNEL_TYPE = {
    "time_series": TimeSeriesData,
    "histogram": HistogramData,
    "geo_histogram": GeoHistogramData,
}

# Statistic consistency is checked at this relative tolerance.
STAT_REL_TOL = 1e-9
_STAT_ABS_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class PayloadStats:
    stat_min: float
    stat_max: float
    stat_avg: float
    scalar_count: int
    excluded_samples: int


def _histogram_moments(hist: HistogramData) -> tuple[float, int, float | None, float | None, int]:
    """(weighted sum, weight, min, max, excluded) over finite-bin midpoints.

    Each sample in a cell contributes one scalar per dimension: that
    dimension's bin midpoint. Under/overflow mass has no midpoint and is
    excluded (reported separately).
    """
    finite = hist.finite_counts
    finite_total = int(finite.sum())
    excluded = int(hist.counts.sum()) - finite_total
    wsum = 0.0
    mn: float | None = None
    mx: float | None = None
    for j, spec in enumerate(hist.bin_specs):
        axes = tuple(k for k in range(hist.dims) if k != j)
        marginal = finite.sum(axis=axes) if axes else finite
        mids = np.asarray(spec.midpoints())
        wsum += float((marginal * mids).sum())
        occupied = mids[marginal > 0]
        if occupied.size:
            mn = float(occupied.min()) if mn is None else min(mn, float(occupied.min()))
            mx = float(occupied.max()) if mx is None else max(mx, float(occupied.max()))
    return wsum, finite_total * hist.dims, mn, mx, excluded


def payload_statistics(payload: Payload) -> PayloadStats:
    """Preview statistics over all scalar values a payload represents."""
    if isinstance(payload, TimeSeriesData):
        values = payload.values
        if not values:
            return PayloadStats(0.0, 0.0, 0.0, 0, 0)
        return PayloadStats(min(values), max(values), sum(values) / len(values), len(values), 0)
    if isinstance(payload, HistogramData):
        wsum, weight, mn, mx, excluded = _histogram_moments(payload)
    else:
        assert isinstance(payload, GeoHistogramData)
        wsum, weight, excluded = 0.0, 0, 0
        mn = mx = None
        for cell in sorted(payload.cells):
            cw, cweight, cmn, cmx, cexcl = _histogram_moments(payload.cells[cell])
            wsum += cw
            weight += cweight
            excluded += cexcl
            if cmn is not None:
                mn = cmn if mn is None else min(mn, cmn)
                mx = cmx if mx is None else max(mx, cmx)  # type: ignore[arg-type]
    if weight == 0 or mn is None or mx is None:
        return PayloadStats(0.0, 0.0, 0.0, 0, excluded)
    return PayloadStats(mn, mx, wsum / weight, weight, excluded)


def package_id_for(vehicle_pseudonym: str, channel_id: str, sequence_no: int) -> str:
    return str(uuid.uuid5(_PACKAGE_ID_NAMESPACE, f"{vehicle_pseudonym}/{channel_id}/{sequence_no}"))


def make_package(
    spec: ChannelSpec,
    payload: Payload,
    ctx: VehicleContext,
    signing_key: SigningKey,
    sequence_no: int,
) -> DataPackage:
    expected_type = _KIND_BY_CHANNEL_TYPE[spec.channel_type]
    if not isinstance(payload, expected_type):
        raise ValueError(
            f"channel {spec.channel_id!r} expects a {spec.channel_type} payload, "
            f"got {payload_kind(payload)}"
        )
    if isinstance(payload, TimeSeriesData) and payload.rate_hz != spec.tsmc_rate_hz:
        raise ValueError(
            f"payload rate {payload.rate_hz} Hz does not match channel rate {spec.tsmc_rate_hz} Hz"
        )
    if isinstance(payload, HistogramData) and payload.bin_specs != spec.bin_specs:
        raise ValueError(f"payload bin specs do not match channel {spec.channel_id!r}")
    if isinstance(payload, GeoHistogramData):
        if payload.geo_resolution_deg != spec.geo_resolution_deg:
            raise ValueError(
                f"payload resolution {payload.geo_resolution_deg} does not match "
                f"channel resolution {spec.geo_resolution_deg}"
            )
        specs = payload.bin_specs
        if specs is not None and specs != spec.bin_specs:
            raise ValueError(f"payload bin specs do not match channel {spec.channel_id!r}")
    if sequence_no < 0:
        raise ValueError(f"sequence_no must be >= 0, got {sequence_no}")

    stats = payload_statistics(payload)
    checksum = hashlib.sha256(payload_bytes(payload)).hexdigest()
    meta = PackageMeta(
        package_id=package_id_for(ctx.vehicle_pseudonym, spec.channel_id, sequence_no),
        channel_id=spec.channel_id,
        vehicle_pseudonym=ctx.vehicle_pseudonym,
        t_start_ms=ctx.t_start_ms,
        t_end_ms=ctx.t_end_ms,
        mileage_start_km=ctx.mileage_start_km,
        mileage_end_km=ctx.mileage_end_km,
        geo_bounds=ctx.bounds(),
        stat_min=stats.stat_min,
        stat_max=stats.stat_max,
        stat_avg=stats.stat_avg,
        sequence_no=sequence_no,
        checksum=checksum,
        signature="",
        owner_id=ctx.owner_id,
        stakeholders=ctx.stakeholders,
        privacy_level=ctx.privacy_level,
    )
    signature = signing_key.sign(signed_bytes(meta, payload))
    return DataPackage(meta=replace(meta, signature=signature), payload=payload)


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    notes: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_obj(self) -> dict:
        return {
            "valid": self.valid,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "notes": list(self.notes),
        }


def _stat_close(stored: float, recomputed: float) -> bool:
    return math.isclose(stored, recomputed, rel_tol=STAT_REL_TOL, abs_tol=_STAT_ABS_TOL)


Verifier = Union[KeyRegistry, PublicKey]


def validate_package(pkg: DataPackage, verifier: Verifier) -> ValidationReport:
    """Run every integrity check and report them independently."""
    meta, payload = pkg.meta, pkg.payload
    checks: list[CheckResult] = []
    notes: list[str] = []

    recomputed_checksum = hashlib.sha256(payload_bytes(payload)).hexdigest()
    checks.append(
        CheckResult(
            "checksum",
            recomputed_checksum == meta.checksum,
            "" if recomputed_checksum == meta.checksum else
            f"stored {meta.checksum[:16]}..., recomputed {recomputed_checksum[:16]}...",
        )
    )

    data = signed_bytes(meta, payload)
    if isinstance(verifier, KeyRegistry):
        sig_ok, reason = verifier.verify(meta.signature, data)
    else:
        sig_ok, reason = verify_with_key(verifier, meta.signature, data)
    checks.append(CheckResult("signature", sig_ok, reason))

    stats = payload_statistics(payload)
    stats_ok = (
        _stat_close(meta.stat_min, stats.stat_min)
        and _stat_close(meta.stat_max, stats.stat_max)
        and _stat_close(meta.stat_avg, stats.stat_avg)
    )
    checks.append(
        CheckResult(
            "statistics",
            stats_ok,
            "" if stats_ok else
            f"stored ({meta.stat_min}, {meta.stat_max}, {meta.stat_avg}), "
            f"recomputed ({stats.stat_min}, {stats.stat_max}, {stats.stat_avg})",
        )
    )
    if stats.excluded_samples:
        notes.append(
            f"{stats.excluded_samples} samples in under/overflow bins are excluded from statistics"
        )

    checks.append(
        CheckResult(
            "time_order",
            meta.t_start_ms <= meta.t_end_ms,
            "" if meta.t_start_ms <= meta.t_end_ms else f"{meta.t_start_ms} > {meta.t_end_ms}",
        )
    )
    checks.append(
        CheckResult(
            "mileage_order",
            meta.mileage_start_km <= meta.mileage_end_km,
            "" if meta.mileage_start_km <= meta.mileage_end_km else
            f"{meta.mileage_start_km} > {meta.mileage_end_km}",
        )
    )
    eps = STAT_REL_TOL * max(1.0, abs(meta.stat_min), abs(meta.stat_max))
    order_ok = meta.stat_min <= meta.stat_avg + eps and meta.stat_avg <= meta.stat_max + eps
    checks.append(CheckResult("stat_order", order_ok, "" if order_ok else "min <= avg <= max violated"))
    checks.append(
        CheckResult(
            "sequence",
            meta.sequence_no >= 0,
            "" if meta.sequence_no >= 0 else f"sequence_no {meta.sequence_no} < 0",
        )
    )

    if isinstance(payload, HistogramData):
        conserved = payload.conserved()
        checks.append(
            CheckResult(
                "count_conservation",
                conserved,
                "" if conserved else
                f"counts sum to {int(payload.counts.sum())}, total_samples says {payload.total_samples}",
            )
        )
    elif isinstance(payload, GeoHistogramData):
        bad = [str(cell) for cell in sorted(payload.cells) if not payload.cells[cell].conserved()]
        checks.append(
            CheckResult(
                "count_conservation",
                not bad,
                "" if not bad else f"cells with broken conservation: {', '.join(bad[:5])}",
            )
        )

    return ValidationReport(tuple(checks), tuple(notes))
