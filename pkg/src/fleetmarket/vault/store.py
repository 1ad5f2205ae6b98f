"""Per-owner package vaults with owner-controlled sharing.

One store hosts many isolated vaults. Packages are validated on the way
in, persisted append-only as canonical bytes (one file per package plus
an index file per owner), and never cross owner boundaries on the way
out. The marketplace only sees meta-data through the ingest
notification; it may fetch payloads solely for channels whose owner has
granted consent — consent is enforced here as well as in the
marketplace's routing.

On-disk layout under the store root:

    owners/<owner_id>/packages/<package_id>.pkg   canonical package bytes
    owners/<owner_id>/index.json                  package index (canonical)
    owners/<owner_id>/consent.json                consent records (canonical)
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from ..model import (
    DataPackage,
    KeyRegistry,
    PackageMeta,
    ValidationReport,
    canonical,
    deserialize_package,
    serialize_package,
    validate_package,
)
from .consent import WILDCARD, ConsentRecord, consent_allows, upsert_consent

MARKETPLACE_TOKEN = "marketplace:primary"


def owner_token(owner_id: str) -> str:
    return f"owner:{owner_id}"


class AuthorizationError(PermissionError):
    pass


class ValidationRejected(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(f"package failed validation: {', '.join(report.failed())}")
        self.report = report


class SequenceConflictError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class StoreResult:
    status: str  # "stored" | "duplicate"
    package_id: str


@dataclass(frozen=True, slots=True)
class _IndexEntry:
    package_id: str
    channel_id: str
    vehicle_pseudonym: str
    sequence_no: int
    checksum: str
    t_start_ms: int
    t_end_ms: int


class IngestListener(Protocol):
    def __call__(self, meta: PackageMeta, owner_id: str) -> None: ...


class VaultStore:
    """Filesystem-backed vault host; safe for concurrent use across owners."""

    def __init__(
        self,
        root: str | Path,
        key_registry: KeyRegistry,
        on_ingest: IngestListener | None = None,
        on_consent: Callable[[ConsentRecord], None] | None = None,
        marketplace_token: str = MARKETPLACE_TOKEN,
    ):
        self.root = Path(root)
        self.key_registry = key_registry
        self.on_ingest = on_ingest
        self.on_consent = on_consent
        self.marketplace_token = marketplace_token
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()
        (self.root / "owners").mkdir(parents=True, exist_ok=True)

    # -- internals ----------------------------------------------------------

    def _lock(self, owner_id: str) -> threading.RLock:
        with self._locks_guard:
            if owner_id not in self._locks:
                self._locks[owner_id] = threading.RLock()
            return self._locks[owner_id]

    def _owner_dir(self, owner_id: str) -> Path:
        if "/" in owner_id or owner_id in ("", ".", ".."):
            raise ValueError(f"bad owner id {owner_id!r}")
        return self.root / "owners" / owner_id

    def _load_index(self, owner_id: str) -> list[_IndexEntry]:
        path = self._owner_dir(owner_id) / "index.json"
        if not path.exists():
            return []
        rows = canonical.decode(path.read_bytes())
        return [_IndexEntry(**row) for row in rows]

    def _write_index(self, owner_id: str, entries: list[_IndexEntry]) -> None:
        rows = [
            {
                "package_id": e.package_id,
                "channel_id": e.channel_id,
                "vehicle_pseudonym": e.vehicle_pseudonym,
                "sequence_no": e.sequence_no,
                "checksum": e.checksum,
                "t_start_ms": e.t_start_ms,
                "t_end_ms": e.t_end_ms,
            }
            for e in entries
        ]
        (self._owner_dir(owner_id) / "index.json").write_bytes(canonical.encode(rows))

    def _load_consent(self, owner_id: str) -> dict[str, ConsentRecord]:
        path = self._owner_dir(owner_id) / "consent.json"
        if not path.exists():
            return {}
        rows = canonical.decode(path.read_bytes())
        return {row["channel_id"]: ConsentRecord(**row) for row in rows}

    def _write_consent(self, owner_id: str, records: dict[str, ConsentRecord]) -> None:
        rows = [
            {
                "owner_id": r.owner_id,
                "channel_id": r.channel_id,
                "granted": r.granted,
                "updated_at_ms": r.updated_at_ms,
            }
            for _, r in sorted(records.items())
        ]
        (self._owner_dir(owner_id) / "consent.json").write_bytes(canonical.encode(rows))

    def _authorize_read(self, owner_id: str, channel_id: str | None, token: str) -> None:
        if token == owner_token(owner_id):
            return
        if token == self.marketplace_token:
            if channel_id is None:
                raise AuthorizationError("marketplace reads are per channel")
            if not consent_allows(self._load_consent(owner_id).values(), channel_id):
                raise AuthorizationError(
                    f"owner {owner_id!r} has not granted consent for {channel_id!r}"
                )
            return
        raise AuthorizationError("unknown requester token")

    # -- package storage ----------------------------------------------------

    def owners(self) -> list[str]:
        return sorted(p.name for p in (self.root / "owners").iterdir() if p.is_dir())

    def store_package(self, owner_id: str, pkg: DataPackage) -> StoreResult:
        report = validate_package(pkg, self.key_registry)
        if not report.valid:
            raise ValidationRejected(report)
        meta = pkg.meta
        if meta.owner_id != owner_id:
            raise AuthorizationError(
                f"package owner {meta.owner_id!r} does not match vault {owner_id!r}"
            )
        with self._lock(owner_id):
            owner_dir = self._owner_dir(owner_id)
            (owner_dir / "packages").mkdir(parents=True, exist_ok=True)
            entries = self._load_index(owner_id)
            for e in entries:
                same_slot = (
                    e.channel_id == meta.channel_id
                    and e.sequence_no == meta.sequence_no
                    and e.vehicle_pseudonym == meta.vehicle_pseudonym
                )
                if e.checksum == meta.checksum and same_slot:
                    return StoreResult("duplicate", e.package_id)
                if same_slot:
                    raise SequenceConflictError(
                        f"sequence {meta.sequence_no} of {meta.channel_id!r} already stored "
                        f"with a different checksum"
                    )
            path = owner_dir / "packages" / f"{meta.package_id}.pkg"
            path.write_bytes(serialize_package(pkg))
            entries.append(
                _IndexEntry(
                    package_id=meta.package_id,
                    channel_id=meta.channel_id,
                    vehicle_pseudonym=meta.vehicle_pseudonym,
                    sequence_no=meta.sequence_no,
                    checksum=meta.checksum,
                    t_start_ms=meta.t_start_ms,
                    t_end_ms=meta.t_end_ms,
                )
            )
            self._write_index(owner_id, entries)
        if self.on_ingest is not None:
            self.on_ingest(meta, owner_id)
        return StoreResult("stored", meta.package_id)

    def get_package(self, owner_id: str, package_id: str, requester_token: str) -> DataPackage:
        with self._lock(owner_id):
            entries = self._load_index(owner_id)
            entry = next((e for e in entries if e.package_id == package_id), None)
            if entry is None:
                raise KeyError(package_id)
            self._authorize_read(owner_id, entry.channel_id, requester_token)
            data = (self._owner_dir(owner_id) / "packages" / f"{package_id}.pkg").read_bytes()
        return deserialize_package(data)

    def fetch_packages(
        self,
        owner_id: str,
        channel_id: str,
        since_sequence_no: int,
        requester_token: str,
    ) -> list[DataPackage]:
        """Packages of one channel with sequence_no > since, in sequence order.

        Multi-vehicle vaults apply the threshold per vehicle.
        """
        self._authorize_read(owner_id, channel_id, requester_token)
        with self._lock(owner_id):
            entries = [
                e
                for e in self._load_index(owner_id)
                if e.channel_id == channel_id and e.sequence_no > since_sequence_no
            ]
            entries.sort(key=lambda e: (e.vehicle_pseudonym, e.sequence_no))
            blobs = [
                (self._owner_dir(owner_id) / "packages" / f"{e.package_id}.pkg").read_bytes()
                for e in entries
            ]
        return [deserialize_package(b) for b in blobs]

    def list_meta(self, owner_id: str, requester_token: str) -> list[dict]:
        """Owner-facing index listing (meta previews for the vault UI)."""
        if requester_token != owner_token(owner_id):
            raise AuthorizationError("only the owner may list the vault")
        with self._lock(owner_id):
            entries = self._load_index(owner_id)
            out = []
            for e in sorted(entries, key=lambda e: (e.channel_id, e.vehicle_pseudonym, e.sequence_no)):
                pkg = deserialize_package(
                    (self._owner_dir(owner_id) / "packages" / f"{e.package_id}.pkg").read_bytes()
                )
                from ..model.serialization import meta_to_obj

                out.append(meta_to_obj(pkg.meta))
        return out

    def highest_sequence(self, owner_id: str, vehicle_pseudonym: str, channel_id: str) -> int | None:
        with self._lock(owner_id):
            seqs = [
                e.sequence_no
                for e in self._load_index(owner_id)
                if e.channel_id == channel_id and e.vehicle_pseudonym == vehicle_pseudonym
            ]
        return max(seqs) if seqs else None

    # -- consent ------------------------------------------------------------

    def set_consent(
        self, owner_id: str, channel_id: str, granted: bool, updated_at_ms: int
    ) -> ConsentRecord:
        record = ConsentRecord(owner_id, channel_id, granted, updated_at_ms)
        with self._lock(owner_id):
            self._owner_dir(owner_id).mkdir(parents=True, exist_ok=True)
            records = self._load_consent(owner_id)
            upsert_consent(records, record)
            self._write_consent(owner_id, records)
        if self.on_consent is not None:
            self.on_consent(record)
        return record

    def consent_records(self, owner_id: str) -> list[ConsentRecord]:
        with self._lock(owner_id):
            return sorted(self._load_consent(owner_id).values(), key=lambda r: r.channel_id)

    def consent_allows(self, owner_id: str, channel_id: str) -> bool:
        return consent_allows(self.consent_records(owner_id), channel_id)


__all__ = [
    "AuthorizationError",
    "ConsentRecord",
    "MARKETPLACE_TOKEN",
    "SequenceConflictError",
    "StoreResult",
    "ValidationRejected",
    "VaultStore",
    "WILDCARD",
    "consent_allows",
    "owner_token",
]
