"""Package wire schema on top of the canonical encoding.

A serialized package is one canonical document:

    {"meta": {...17 fields...}, "payload": {"kind": ..., ...}}

Deserialization is strict: unknown fields, wrong types and malformed
cell keys are schema errors carrying the offending field path.
serialize(deserialize(serialize(p))) is byte-identical to serialize(p).
"""

from __future__ import annotations

import re
from typing import Any, Mapping

import numpy as np

from . import canonical
from .canonical import ParseError, SchemaError
from .histogram import BinSpec, CellId, GeoHistogramData, HistogramData
from .package_types import DataPackage, PackageMeta, Payload
from .timeseries import TimeSeriesData

_CELL_KEY = re.compile(r"^-?\d+,-?\d+$")

_META_FIELDS = frozenset(
    {
        "package_id",
        "channel_id",
        "vehicle_pseudonym",
        "t_start_ms",
        "t_end_ms",
        "mileage_start_km",
        "mileage_end_km",
        "geo_bounds",
        "stat_min",
        "stat_max",
        "stat_avg",
        "sequence_no",
        "checksum",
        "signature",
        "owner_id",
        "stakeholders",
        "privacy_level",
    }
)

_PRIVACY_LEVELS = ("private", "fleet", "public")


def _require_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise SchemaError(f"expected object, got {type(value).__name__}", path)
    return value


def _get(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError("missing required field", f"{path}.{key}")
    return obj[key]


def _require_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected string, got {type(value).__name__}", path)
    return value


def _require_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected integer, got {type(value).__name__}", path)
    return value


def _require_real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected number, got {type(value).__name__}", path)
    return float(value)


def _require_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected array, got {type(value).__name__}", path)
    return value


def _reject_extra(obj: Mapping[str, Any], allowed: frozenset[str] | set[str], path: str) -> None:
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise SchemaError(f"unexpected field {extra[0]!r}", f"{path}.{extra[0]}")


# --- payload encoding ------------------------------------------------------

def payload_kind(payload: Payload) -> str:
    if isinstance(payload, TimeSeriesData):
        return "time_series"
    if isinstance(payload, HistogramData):
        return "histogram"
    if isinstance(payload, GeoHistogramData):
        return "geo_histogram"
    raise TypeError(f"unsupported payload type {type(payload).__name__}")


def _histogram_obj(hist: HistogramData) -> dict[str, Any]:
    return {
        "dims": hist.dims,
        "bin_specs": [{"edges": list(spec.edges)} for spec in hist.bin_specs],
        "counts": hist.counts.tolist(),
        "total_samples": hist.total_samples,
    }


def payload_to_obj(payload: Payload) -> dict[str, Any]:
    kind = payload_kind(payload)
    if isinstance(payload, TimeSeriesData):
        return {
            "kind": kind,
            "rate_hz": payload.rate_hz,
            "t0_ms": payload.t0_ms,
            "values": list(payload.values),
        }
    if isinstance(payload, HistogramData):
        return {"kind": kind, **_histogram_obj(payload)}
    assert isinstance(payload, GeoHistogramData)
    cells = {f"{c.row},{c.col}": _histogram_obj(h) for c, h in payload.cells.items()}
    return {"kind": kind, "geo_resolution_deg": payload.geo_resolution_deg, "cells": cells}


def payload_bytes(payload: Payload) -> bytes:
    """Canonical payload bytes; the substrate for checksums."""
    return canonical.encode(payload_to_obj(payload))


def _histogram_from_obj(obj: Mapping[str, Any], path: str, extra_keys: set[str] | None = None) -> HistogramData:
    allowed = {"dims", "bin_specs", "counts", "total_samples"} | (extra_keys or set())
    _reject_extra(obj, allowed, path)
    dims = _require_int(_get(obj, "dims", path), f"{path}.dims")
    raw_specs = _require_list(_get(obj, "bin_specs", path), f"{path}.bin_specs")
    if dims != len(raw_specs):
        raise SchemaError(f"dims {dims} != number of bin specs {len(raw_specs)}", f"{path}.dims")
    specs = []
    for j, raw in enumerate(raw_specs):
        spec_path = f"{path}.bin_specs[{j}]"
        raw = _require_mapping(raw, spec_path)
        _reject_extra(raw, {"edges"}, spec_path)
        edges = [
            _require_real(e, f"{spec_path}.edges[{k}]")
            for k, e in enumerate(_require_list(_get(raw, "edges", spec_path), f"{spec_path}.edges"))
        ]
        try:
            specs.append(BinSpec(tuple(edges)))
        except ValueError as exc:
            raise SchemaError(str(exc), f"{spec_path}.edges") from exc
    total = _require_int(_get(obj, "total_samples", path), f"{path}.total_samples")
    counts_obj = _get(obj, "counts", path)

    def check_ints(node: Any, p: str, depth: int) -> None:
        if depth == 0:
            _require_int(node, p)
            return
        for i, child in enumerate(_require_list(node, p)):
            check_ints(child, f"{p}[{i}]", depth - 1)

    check_ints(counts_obj, f"{path}.counts", dims)
    try:
        counts = np.asarray(counts_obj, dtype=np.int64)
        return HistogramData(tuple(specs), counts, total)
    except ValueError as exc:
        raise SchemaError(str(exc), f"{path}.counts") from exc


def payload_from_obj(obj: Any, path: str = "payload") -> Payload:
    obj = _require_mapping(obj, path)
    kind = _require_str(_get(obj, "kind", path), f"{path}.kind")
    if kind == "time_series":
        _reject_extra(obj, {"kind", "rate_hz", "t0_ms", "values"}, path)
        rate = _require_real(_get(obj, "rate_hz", path), f"{path}.rate_hz")
        t0 = _require_int(_get(obj, "t0_ms", path), f"{path}.t0_ms")
        values = [
            _require_real(v, f"{path}.values[{i}]")
            for i, v in enumerate(_require_list(_get(obj, "values", path), f"{path}.values"))
        ]
        try:
            return TimeSeriesData(rate_hz=rate, t0_ms=t0, values=tuple(values))
        except ValueError as exc:
            raise SchemaError(str(exc), path) from exc
    if kind == "histogram":
        return _histogram_from_obj(obj, path, extra_keys={"kind"})
    if kind == "geo_histogram":
        _reject_extra(obj, {"kind", "geo_resolution_deg", "cells"}, path)
        resolution = _require_real(_get(obj, "geo_resolution_deg", path), f"{path}.geo_resolution_deg")
        cells_obj = _require_mapping(_get(obj, "cells", path), f"{path}.cells")
        cells: dict[CellId, HistogramData] = {}
        for key, cell_obj in cells_obj.items():
            cell_path = f"{path}.cells[{key!r}]"
            if not _CELL_KEY.match(key):
                raise SchemaError("cell key must look like 'row,col'", cell_path)
            row, col = (int(part) for part in key.split(","))
            cells[CellId(row, col)] = _histogram_from_obj(
                _require_mapping(cell_obj, cell_path), cell_path
            )
        try:
            return GeoHistogramData(resolution, cells)
        except ValueError as exc:
            raise SchemaError(str(exc), f"{path}.cells") from exc
    raise SchemaError(f"unknown payload kind {kind!r}", f"{path}.kind")


# --- meta encoding ---------------------------------------------------------

def meta_to_obj(meta: PackageMeta, include_signature: bool = True) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "package_id": meta.package_id,
        "channel_id": meta.channel_id,
        "vehicle_pseudonym": meta.vehicle_pseudonym,
        "t_start_ms": meta.t_start_ms,
        "t_end_ms": meta.t_end_ms,
        "mileage_start_km": meta.mileage_start_km,
        "mileage_end_km": meta.mileage_end_km,
        "geo_bounds": list(meta.geo_bounds) if meta.geo_bounds is not None else None,
        "stat_min": meta.stat_min,
        "stat_max": meta.stat_max,
        "stat_avg": meta.stat_avg,
        "sequence_no": meta.sequence_no,
        "checksum": meta.checksum,
        "owner_id": meta.owner_id,
        "stakeholders": list(meta.stakeholders),
        "privacy_level": meta.privacy_level,
    }
    if include_signature:
        obj["signature"] = meta.signature
    return obj


def meta_from_obj(obj: Any, path: str = "meta") -> PackageMeta:
    obj = _require_mapping(obj, path)
    _reject_extra(obj, _META_FIELDS, path)
    bounds_obj = _get(obj, "geo_bounds", path)
    bounds: tuple[float, float, float, float] | None = None
    if bounds_obj is not None:
        bounds_list = _require_list(bounds_obj, f"{path}.geo_bounds")
        if len(bounds_list) != 4:
            raise SchemaError("geo_bounds needs exactly 4 numbers", f"{path}.geo_bounds")
        lat_min, lat_max, lon_min, lon_max = (
            _require_real(v, f"{path}.geo_bounds[{i}]") for i, v in enumerate(bounds_list)
        )
        bounds = (lat_min, lat_max, lon_min, lon_max)
    privacy = _require_str(_get(obj, "privacy_level", path), f"{path}.privacy_level")
    if privacy not in _PRIVACY_LEVELS:
        raise SchemaError(f"privacy_level must be one of {_PRIVACY_LEVELS}", f"{path}.privacy_level")
    stakeholders = tuple(
        _require_str(s, f"{path}.stakeholders[{i}]")
        for i, s in enumerate(_require_list(_get(obj, "stakeholders", path), f"{path}.stakeholders"))
    )
    return PackageMeta(
        package_id=_require_str(_get(obj, "package_id", path), f"{path}.package_id"),
        channel_id=_require_str(_get(obj, "channel_id", path), f"{path}.channel_id"),
        vehicle_pseudonym=_require_str(
            _get(obj, "vehicle_pseudonym", path), f"{path}.vehicle_pseudonym"
        ),
        t_start_ms=_require_int(_get(obj, "t_start_ms", path), f"{path}.t_start_ms"),
        t_end_ms=_require_int(_get(obj, "t_end_ms", path), f"{path}.t_end_ms"),
        mileage_start_km=_require_real(_get(obj, "mileage_start_km", path), f"{path}.mileage_start_km"),
        mileage_end_km=_require_real(_get(obj, "mileage_end_km", path), f"{path}.mileage_end_km"),
        geo_bounds=bounds,
        stat_min=_require_real(_get(obj, "stat_min", path), f"{path}.stat_min"),
        stat_max=_require_real(_get(obj, "stat_max", path), f"{path}.stat_max"),
        stat_avg=_require_real(_get(obj, "stat_avg", path), f"{path}.stat_avg"),
        sequence_no=_require_int(_get(obj, "sequence_no", path), f"{path}.sequence_no"),
        checksum=_require_str(_get(obj, "checksum", path), f"{path}.checksum"),
        signature=_require_str(_get(obj, "signature", path), f"{path}.signature"),
        owner_id=_require_str(_get(obj, "owner_id", path), f"{path}.owner_id"),
        stakeholders=stakeholders,
        privacy_level=privacy,  # type: ignore[arg-type]
    )


# --- whole packages --------------------------------------------------------

def package_to_obj(pkg: DataPackage) -> dict[str, Any]:
    return {"meta": meta_to_obj(pkg.meta), "payload": payload_to_obj(pkg.payload)}


def serialize_package(pkg: DataPackage) -> bytes:
    return canonical.encode(package_to_obj(pkg))


def package_from_obj(obj: Any, path: str = "") -> DataPackage:
    prefix = f"{path}." if path else ""
    obj = _require_mapping(obj, path or "<root>")
    _reject_extra(obj, {"meta", "payload"}, path or "<root>")
    meta = meta_from_obj(_get(obj, "meta", path or "<root>"), f"{prefix}meta")
    payload = payload_from_obj(_get(obj, "payload", path or "<root>"), f"{prefix}payload")
    return DataPackage(meta=meta, payload=payload)


def deserialize_package(data: bytes) -> DataPackage:
    """Parse canonical bytes back into a package.

    Raises ParseError (with byte offset) on malformed input and
    SchemaError (with field path) on structural violations.
    """
    return package_from_obj(canonical.decode(data))


def signed_bytes(meta: PackageMeta, payload: Payload) -> bytes:
    """The bytes a producer signs: meta without its signature, plus payload."""
    return canonical.encode(
        {"meta": meta_to_obj(meta, include_signature=False), "payload": payload_to_obj(payload)}
    )


__all__ = [
    "ParseError",
    "SchemaError",
    "deserialize_package",
    "meta_from_obj",
    "meta_to_obj",
    "package_from_obj",
    "package_to_obj",
    "payload_bytes",
    "payload_from_obj",
    "payload_kind",
    "payload_to_obj",
    "serialize_package",
    "signed_bytes",
]
