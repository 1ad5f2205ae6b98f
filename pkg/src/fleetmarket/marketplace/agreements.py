"""Access agreements between service providers and the marketplace."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping

from ..model import ChannelSpec, PackageMeta
from .catalog import boxes_intersect

AgreementMode = Literal["pull", "push"]
AgreementStatus = Literal["active", "cancelled_by_owner_scope", "terminated_by_provider"]


@dataclass(frozen=True)
class AgreementFilter:
    """Optional constraints a package meta must satisfy to be routed."""

    geo_bounds: tuple[float, float, float, float] | None = None
    min_t_start_ms: int | None = None
    max_age_ms: int | None = None
    quality_tier: str | None = None

    def matches(
        self, meta: PackageMeta, now_ms: int, specs: Mapping[str, ChannelSpec]
    ) -> bool:
        if self.geo_bounds is not None:
            if meta.geo_bounds is None or not boxes_intersect(meta.geo_bounds, self.geo_bounds):
                return False
        if self.min_t_start_ms is not None and meta.t_start_ms < self.min_t_start_ms:
            return False
        if self.max_age_ms is not None and now_ms - meta.t_end_ms > self.max_age_ms:
            return False
        if self.quality_tier is not None:
            spec = specs.get(meta.channel_id)
            if spec is None or spec.quality_tier != self.quality_tier:
                return False
        return True

    def to_obj(self) -> dict:
        return {
            "geo_bounds": list(self.geo_bounds) if self.geo_bounds is not None else None,
            "min_t_start_ms": self.min_t_start_ms,
            "max_age_ms": self.max_age_ms,
            "quality_tier": self.quality_tier,
        }

    @classmethod
    def from_obj(cls, obj: dict | None) -> "AgreementFilter":
        if not obj:
            return cls()
        allowed = {"geo_bounds", "min_t_start_ms", "max_age_ms", "quality_tier"}
        unknown = sorted(set(obj) - allowed)
        if unknown:
            raise ValueError(f"unknown filter fields: {', '.join(unknown)}")
        bounds = obj.get("geo_bounds")
        return cls(
            geo_bounds=tuple(float(b) for b in bounds) if bounds is not None else None,  # type: ignore[arg-type]
            min_t_start_ms=obj.get("min_t_start_ms"),
            max_age_ms=obj.get("max_age_ms"),
            quality_tier=obj.get("quality_tier"),
        )


@dataclass
class Agreement:
    agreement_id: str
    provider_id: str
    channel_ids: tuple[str, ...]
    filter: AgreementFilter
    mode: AgreementMode
    created_at_ms: int
    status: AgreementStatus = "active"

    @property
    def active(self) -> bool:
        return self.status == "active"

    def to_obj(self) -> dict:
        return {
            "agreement_id": self.agreement_id,
            "provider_id": self.provider_id,
            "channel_ids": list(self.channel_ids),
            "filter": self.filter.to_obj(),
            "mode": self.mode,
            "created_at_ms": self.created_at_ms,
            "status": self.status,
        }


@dataclass(frozen=True, slots=True)
class DeliveryRecord:
    """Bookkeeping for every package handed to a provider.

    Delivery is at-least-once: replays are recorded with duplicate=True
    and consumers dedupe by package_id.
    """

    agreement_id: str
    package_id: str
    mode: AgreementMode
    delivered_at_ms: int
    vehicle_pseudonym: str
    channel_id: str
    sequence_no: int
    duplicate: bool = False

    def to_obj(self) -> dict:
        return {
            "agreement_id": self.agreement_id,
            "package_id": self.package_id,
            "mode": self.mode,
            "delivered_at_ms": self.delivered_at_ms,
            "vehicle_pseudonym": self.vehicle_pseudonym,
            "channel_id": self.channel_id,
            "sequence_no": self.sequence_no,
            "duplicate": self.duplicate,
        }


@dataclass(frozen=True)
class DeadLetter:
    agreement_id: str
    package_id: str
    attempts: int
    error: str

    def to_obj(self) -> dict:
        return {
            "agreement_id": self.agreement_id,
            "package_id": self.package_id,
            "attempts": self.attempts,
            "error": self.error,
        }


@dataclass
class UnknownChannelError(ValueError):
    unknown: tuple[str, ...] = field(default_factory=tuple)

    def __str__(self) -> str:
        return f"unknown channels: {', '.join(self.unknown)}"


class InactiveAgreementError(ValueError):
    pass
