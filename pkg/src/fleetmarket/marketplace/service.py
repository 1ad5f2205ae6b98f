"""The marketplace service: catalog indexing, agreements, and routing.

The service mediates between vaults and providers. It stores meta-data
only; payloads flow vault -> broker -> provider and are never retained.
Consent is mirrored from vault notifications and checked when routing
(push: at ingest time, so in-flight retries complete after a revocation;
pull: at fetch time, so batches are strictly current). Every state
change is appended to an event log that a pure reference router can
replay to re-derive the exact set of expected deliveries.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol

from ..model import ChannelSpec, DataPackage, PackageMeta
from ..model.serialization import meta_to_obj
from ..vault.consent import ConsentRecord, consent_allows, upsert_consent
from .agreements import (
    Agreement,
    AgreementFilter,
    AgreementMode,
    DeadLetter,
    DeliveryRecord,
    InactiveAgreementError,
    UnknownChannelError,
)
from .broker import Broker, PushTarget, SubscriptionQueue
from .catalog import (
    CATALOG_INDEX_RESOLUTION_DEG,
    CatalogEntry,
    CatalogFilter,
    fold_catalog,
)


class VaultUnreachableError(ConnectionError):
    pass


class VaultAccessor(Protocol):
    """How the marketplace reaches vaults (in-process or over HTTP)."""

    def owners(self) -> list[str]: ...

    def fetch_packages(
        self, owner_id: str, channel_id: str, since_sequence_no: int
    ) -> list[DataPackage]: ...

    def get_package(self, owner_id: str, package_id: str) -> DataPackage: ...


class InProcessVaultAccessor:
    """Direct accessor for a vault store living in the same process."""

    def __init__(self, store) -> None:
        self._store = store

    def owners(self) -> list[str]:
        return self._store.owners()

    def fetch_packages(self, owner_id: str, channel_id: str, since_sequence_no: int):
        return self._store.fetch_packages(
            owner_id, channel_id, since_sequence_no, self._store.marketplace_token
        )

    def get_package(self, owner_id: str, package_id: str):
        return self._store.get_package(owner_id, package_id, self._store.marketplace_token)


@dataclass(frozen=True)
class IngestAck:
    indexed: bool
    reason: str = ""


@dataclass
class PullBatch:
    agreement_id: str
    packages: list[DataPackage]
    vault_errors: list[dict] = field(default_factory=list)

    def to_obj(self) -> dict:
        from ..model.serialization import package_to_obj

        return {
            "agreement_id": self.agreement_id,
            "packages": [package_to_obj(p) for p in self.packages],
            "vault_errors": self.vault_errors,
        }


class MarketplaceService:
    def __init__(
        self,
        channel_specs: Mapping[str, ChannelSpec],
        vault_accessor: VaultAccessor,
        index_resolution_deg: float = CATALOG_INDEX_RESOLUTION_DEG,
        broker_max_attempts: int = 4,
        broker_base_delay_s: float = 0.01,
        key_registry=None,
    ):
        self.channel_specs = dict(channel_specs)
        self.vaults = vault_accessor
        self.key_registry = key_registry  # producer keys re-published to providers
        self.index_resolution_deg = index_resolution_deg
        self._lock = threading.RLock()
        self._now_ms = 0
        self._events: list[dict[str, Any]] = []
        self._indexed_metas: list[PackageMeta] = []
        self._unindexed_count = 0
        self._consent: dict[str, dict[str, ConsentRecord]] = {}
        self._agreements: dict[str, Agreement] = {}
        self._next_agreement = 0
        self._cursors: dict[tuple[str, str, str], int] = {}  # (agreement, vehicle, channel)
        self._vehicles_by_owner: dict[str, set[str]] = {}
        self._records: list[DeliveryRecord] = []
        self._delivered_keys: set[tuple[str, str]] = set()
        self._dead_letters: list[DeadLetter] = []
        self.broker = Broker(
            on_delivered=self._record_push_delivery,
            on_dead_letter=self._record_dead_letter,
            max_attempts=broker_max_attempts,
            base_delay_s=broker_base_delay_s,
        )

    # -- time & logging -------------------------------------------------------

    @property
    def now_ms(self) -> int:
        with self._lock:
            return self._now_ms

    def _log(self, event: dict[str, Any]) -> None:
        self._events.append(event)

    def events(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self._events)

    # -- consent mirror ---------------------------------------------------------

    def notify_consent(self, owner_id: str, channel_id: str, granted: bool, at_ms: int) -> None:
        record = ConsentRecord(owner_id, channel_id, granted, at_ms)
        with self._lock:
            upsert_consent(self._consent.setdefault(owner_id, {}), record)
            self._log(
                {
                    "kind": "consent",
                    "owner_id": owner_id,
                    "channel_id": channel_id,
                    "granted": granted,
                    "at_ms": at_ms,
                }
            )

    def _consent_allows(self, owner_id: str, channel_id: str) -> bool:
        return consent_allows(self._consent.get(owner_id, {}).values(), channel_id)

    # -- ingest -----------------------------------------------------------------

    def ingest_meta(self, meta: PackageMeta, owner_id: str) -> IngestAck:
        """Index an ingest notification and fan out to push agreements.

        The payload fetch for matching push agreements happens here,
        while the consent that justified the routing still holds; the
        actual hand-off to the provider is asynchronous.
        """
        to_submit: list[tuple[str, DataPackage]] = []
        with self._lock:
            self._now_ms = max(self._now_ms, meta.t_end_ms)
            self._log({"kind": "ingest", "owner_id": owner_id, "meta": meta_to_obj(meta)})
            if not self._consent_allows(owner_id, meta.channel_id):
                self._unindexed_count += 1
                return IngestAck(indexed=False, reason="no consent")
            self._indexed_metas.append(meta)
            self._vehicles_by_owner.setdefault(owner_id, set()).add(meta.vehicle_pseudonym)
            matching = [
                ag
                for ag in self._agreements.values()
                if ag.active
                and ag.mode == "push"
                and meta.channel_id in ag.channel_ids
                and ag.filter.matches(meta, self._now_ms, self.channel_specs)
            ]
            if matching:
                pkg = self.vaults.get_package(owner_id, meta.package_id)
                to_submit = [(ag.agreement_id, pkg) for ag in matching]
        for agreement_id, pkg in to_submit:
            self.broker.submit(agreement_id, pkg)
        return IngestAck(indexed=True)

    @property
    def unindexed_count(self) -> int:
        with self._lock:
            return self._unindexed_count

    # -- catalog ------------------------------------------------------------------

    def catalog(self, query: CatalogFilter | None = None) -> list[CatalogEntry]:
        with self._lock:
            return fold_catalog(
                self._indexed_metas, self._now_ms, self.index_resolution_deg, query
            )

    # -- agreements -----------------------------------------------------------------

    def create_agreement(
        self,
        provider_id: str,
        channel_ids: list[str] | tuple[str, ...],
        filter: AgreementFilter | None = None,
        mode: AgreementMode = "pull",
        push_target: PushTarget | None = None,
    ) -> Agreement:
        filter = filter or AgreementFilter()
        with self._lock:
            known = set(self.channel_specs) | {m.channel_id for m in self._indexed_metas}
            unknown = tuple(c for c in channel_ids if c not in known)
            if unknown:
                raise UnknownChannelError(unknown)
            agreement_id = f"ag-{self._next_agreement:04d}"
            self._next_agreement += 1
            agreement = Agreement(
                agreement_id=agreement_id,
                provider_id=provider_id,
                channel_ids=tuple(channel_ids),
                filter=filter,
                mode=mode,
                created_at_ms=self._now_ms,
            )
            self._agreements[agreement_id] = agreement
            if mode == "push":
                self.broker.register(agreement_id, push_target)
            self._log(
                {
                    "kind": "agreement_create",
                    "agreement_id": agreement_id,
                    "provider_id": provider_id,
                    "channel_ids": list(agreement.channel_ids),
                    "filter": filter.to_obj(),
                    "mode": mode,
                }
            )
            return agreement

    def get_agreement(self, agreement_id: str) -> Agreement:
        with self._lock:
            return self._agreements[agreement_id]

    def list_agreements(self, provider_id: str | None = None) -> list[Agreement]:
        with self._lock:
            out = [
                ag
                for ag in self._agreements.values()
                if provider_id is None or ag.provider_id == provider_id
            ]
            return sorted(out, key=lambda ag: ag.agreement_id)

    def terminate(self, agreement_id: str, actor: str) -> Agreement:
        """Idempotently deactivate an agreement and unregister its routing."""
        if actor not in ("owner-scope", "provider"):
            raise ValueError(f"unknown terminating actor {actor!r}")
        with self._lock:
            agreement = self._agreements[agreement_id]
            if not agreement.active:
                return agreement
            agreement.status = (
                "cancelled_by_owner_scope" if actor == "owner-scope" else "terminated_by_provider"
            )
            self.broker.unregister(agreement_id)
            self._log({"kind": "agreement_terminate", "agreement_id": agreement_id})
            return agreement

    def subscription_queue(self, agreement_id: str) -> SubscriptionQueue:
        target = self.broker.target(agreement_id)
        if not isinstance(target, SubscriptionQueue):
            raise KeyError(f"no subscription queue for {agreement_id!r}")
        return target

    # -- pull mode ---------------------------------------------------------------

    def pull(self, provider_id: str, agreement_id: str) -> PullBatch:
        """One whole-fleet batch: everything new since the last pull."""
        with self._lock:
            agreement = self._agreements.get(agreement_id)
            if agreement is None:
                raise KeyError(agreement_id)
            if agreement.provider_id != provider_id:
                raise PermissionError(f"agreement {agreement_id!r} belongs to another provider")
            if not agreement.active:
                raise InactiveAgreementError(f"agreement {agreement_id!r} is {agreement.status}")
            if agreement.mode != "pull":
                raise ValueError(f"agreement {agreement_id!r} is push mode")

            batch: list[DataPackage] = []
            errors: list[dict] = []
            errored_owners: list[str] = []
            for owner_id in self.vaults.owners():
                owner_packages: list[DataPackage] = []
                try:
                    for channel_id in agreement.channel_ids:
                        if not self._consent_allows(owner_id, channel_id):
                            continue
                        known_vehicles = self._vehicles_by_owner.get(owner_id, set())
                        cursors = [
                            self._cursors.get((agreement_id, v, channel_id), -1)
                            for v in known_vehicles
                        ]
                        since = min(cursors, default=-1)
                        fetched = self.vaults.fetch_packages(owner_id, channel_id, since)
                        for pkg in fetched:
                            meta = pkg.meta
                            self._vehicles_by_owner.setdefault(owner_id, set()).add(
                                meta.vehicle_pseudonym
                            )
                            key = (agreement_id, meta.vehicle_pseudonym, channel_id)
                            if meta.sequence_no <= self._cursors.get(key, -1):
                                continue
                            if agreement.filter.matches(meta, self._now_ms, self.channel_specs):
                                owner_packages.append(pkg)
                except VaultUnreachableError as exc:
                    errors.append({"owner_id": owner_id, "error": str(exc)})
                    errored_owners.append(owner_id)
                    continue
                # cursor advance is atomic per owner: only after a clean fetch
                for channel_id in agreement.channel_ids:
                    if not self._consent_allows(owner_id, channel_id):
                        continue
                    seen: dict[str, int] = {}
                    for pkg in owner_packages:
                        if pkg.meta.channel_id == channel_id:
                            seen[pkg.meta.vehicle_pseudonym] = max(
                                seen.get(pkg.meta.vehicle_pseudonym, -1), pkg.meta.sequence_no
                            )
                    for vehicle, top in seen.items():
                        key = (agreement_id, vehicle, channel_id)
                        self._cursors[key] = max(self._cursors.get(key, -1), top)
                batch.extend(owner_packages)

            batch.sort(key=lambda p: (p.meta.vehicle_pseudonym, p.meta.channel_id, p.meta.sequence_no))
            self._log(
                {
                    "kind": "pull",
                    "agreement_id": agreement_id,
                    "vault_errors": sorted(errored_owners),
                }
            )
            for pkg in batch:
                self._record_delivery(agreement_id, pkg, "pull")
            return PullBatch(agreement_id=agreement_id, packages=batch, vault_errors=errors)

    # -- delivery bookkeeping -------------------------------------------------------

    def _record_delivery(self, agreement_id: str, pkg: DataPackage, mode: AgreementMode) -> None:
        meta = pkg.meta
        key = (agreement_id, meta.package_id)
        record = DeliveryRecord(
            agreement_id=agreement_id,
            package_id=meta.package_id,
            mode=mode,
            delivered_at_ms=self._now_ms,
            vehicle_pseudonym=meta.vehicle_pseudonym,
            channel_id=meta.channel_id,
            sequence_no=meta.sequence_no,
            duplicate=key in self._delivered_keys,
        )
        self._delivered_keys.add(key)
        self._records.append(record)

    def _record_push_delivery(self, agreement_id: str, pkg: DataPackage) -> None:
        with self._lock:
            self._record_delivery(agreement_id, pkg, "push")

    def _record_dead_letter(
        self, agreement_id: str, pkg: DataPackage, attempts: int, error: str
    ) -> None:
        with self._lock:
            self._dead_letters.append(
                DeadLetter(agreement_id, pkg.meta.package_id, attempts, error)
            )

    def delivery_records(self) -> list[DeliveryRecord]:
        with self._lock:
            return list(self._records)

    def dead_letters(self) -> list[DeadLetter]:
        with self._lock:
            return list(self._dead_letters)

    def drain(self) -> None:
        """Wait for the push fan-out to quiesce."""
        self.broker.drain()

    def close(self) -> None:
        self.broker.close()
