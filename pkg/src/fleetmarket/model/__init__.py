"""Core data model: signals, measurement channels, packages, wire format."""

from .canonical import CanonicalError, ParseError, SchemaError, decode, encode
from .channels import ChannelSpec, ChannelType, validate_channel_specs
from .histogram import (
    BinSpec,
    CellId,
    GeoHistogramData,
    HistogramData,
    build_geo_histogram,
    build_histogram,
    merge_geo_histograms,
    merge_histograms,
    zero_histogram,
)
from .package import (
    CheckResult,
    PayloadStats,
    ValidationReport,
    make_package,
    package_id_for,
    payload_statistics,
    validate_package,
)
from .package_types import DataPackage, PackageMeta, Payload, PrivacyLevel, VehicleContext
from .serialization import (
    deserialize_package,
    payload_bytes,
    serialize_package,
    signed_bytes,
)
from .signals import SIGNAL_CATALOG, SignalDefinition, SignalSample
from .signing import KeyRegistry, PublicKey, SigningKey, verify_with_key
from .timeseries import DownsampleResult, TimeSeriesData, downsample

__all__ = [
    "BinSpec",
    "CanonicalError",
    "CellId",
    "ChannelSpec",
    "ChannelType",
    "CheckResult",
    "DataPackage",
    "DownsampleResult",
    "GeoHistogramData",
    "HistogramData",
    "KeyRegistry",
    "PackageMeta",
    "ParseError",
    "Payload",
    "PayloadStats",
    "PrivacyLevel",
    "PublicKey",
    "SIGNAL_CATALOG",
    "SchemaError",
    "SignalDefinition",
    "SignalSample",
    "SigningKey",
    "TimeSeriesData",
    "ValidationReport",
    "VehicleContext",
    "build_geo_histogram",
    "build_histogram",
    "decode",
    "deserialize_package",
    "downsample",
    "encode",
    "make_package",
    "merge_geo_histograms",
    "merge_histograms",
    "package_id_for",
    "payload_bytes",
    "payload_statistics",
    "serialize_package",
    "signed_bytes",
    "validate_channel_specs",
    "validate_package",
    "verify_with_key",
    "zero_histogram",
]
