"""Driving the whole pipeline with a synthetic fleet.

Windows are processed in global time order (window by window across all
vehicles), so consent schedule entries interleave with ingests exactly
as they would in a live deployment: a change at t applies before the
first window whose data would be ingested after t. The simulated clock
is the only clock; two runs with the same config and seed produce a
byte-identical package corpus.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import mkdtemp
from typing import Any, Protocol

from ..harmonizer import Harmonizer
from ..marketplace import InProcessVaultAccessor, MarketplaceService
from ..model import (
    DataPackage,
    KeyRegistry,
    SIGNAL_CATALOG,
    SigningKey,
    VehicleContext,
    canonical,
    serialize_package,
    validate_channel_specs,
)
from ..vault import VaultStore
from .config import FleetConfig
from .readings import SIM_MAPPING, SIM_OEM_ID, generate_window_readings
from .trajectory import Trajectory, generate_trajectory


def fleet_signing_key(seed: int) -> SigningKey:
    return SigningKey.from_seed(SIM_OEM_ID, f"{SIM_OEM_ID}:{seed}".encode())


def owner_id_for(vehicle_index: int) -> str:
    return f"owner-{vehicle_index:03d}"


def pseudonym_for(seed: int, vehicle_index: int) -> str:
    digest = hashlib.sha256(f"pseudonym:{seed}:{vehicle_index}".encode()).hexdigest()
    return f"veh-{digest[:10]}"


@dataclass
class InProcessStack:
    """Vault + marketplace wired directly, for tests and in-process runs."""

    store: VaultStore
    service: MarketplaceService
    key_registry: KeyRegistry

    @classmethod
    def build(cls, config: FleetConfig, vault_root: str | Path | None = None) -> "InProcessStack":
        registry = KeyRegistry([fleet_signing_key(config.seed).public])
        store = VaultStore(vault_root or mkdtemp(prefix="fleet-vaults-"), registry)
        specs = validate_channel_specs(config.channels, SIGNAL_CATALOG)
        service = MarketplaceService(specs, InProcessVaultAccessor(store), key_registry=registry)
        store.on_ingest = lambda meta, owner: service.ingest_meta(meta, owner)
        store.on_consent = lambda rec: service.notify_consent(
            rec.owner_id, rec.channel_id, rec.granted, rec.updated_at_ms
        )
        return cls(store=store, service=service, key_registry=registry)

    def close(self) -> None:
        self.service.close()


@dataclass
class RunReport:
    n_vehicles: int
    n_windows: int
    reporting_interval_s: float
    packages_by_channel: dict[str, int] = field(default_factory=dict)
    total_packages: int = 0
    dropped_readings: int = 0
    clamped_by_signal: dict[str, int] = field(default_factory=dict)
    skipped_channels: int = 0
    consent_changes_applied: int = 0
    corpus_digest: str = ""
    store_errors: list[dict[str, Any]] = field(default_factory=list)
    completed: bool = True

    def to_obj(self) -> dict[str, Any]:
        return {
            "n_vehicles": self.n_vehicles,
            "n_windows": self.n_windows,
            "reporting_interval_s": self.reporting_interval_s,
            "packages_by_channel": dict(sorted(self.packages_by_channel.items())),
            "total_packages": self.total_packages,
            "dropped_readings": self.dropped_readings,
            "clamped_by_signal": dict(sorted(self.clamped_by_signal.items())),
            "skipped_channels": self.skipped_channels,
            "consent_changes_applied": self.consent_changes_applied,
            "corpus_digest": self.corpus_digest,
            "store_errors": self.store_errors,
            "completed": self.completed,
        }

    def to_bytes(self) -> bytes:
        return canonical.encode(self.to_obj())


def corpus_digest(packages: list[DataPackage]) -> str:
    blobs = sorted(serialize_package(p) for p in packages)
    digest = hashlib.sha256()
    for blob in blobs:
        digest.update(hashlib.sha256(blob).digest())
    return digest.hexdigest()


class PackageSink(Protocol):
    """Where the simulated fleet delivers packages and consent changes."""

    def store_package(self, owner_id: str, pkg: DataPackage) -> None: ...

    def set_consent(self, owner_id: str, channel_id: str, granted: bool, at_ms: int) -> None: ...


class _StackSink:
    def __init__(self, stack: InProcessStack):
        self._store = stack.store

    def store_package(self, owner_id: str, pkg: DataPackage) -> None:
        self._store.store_package(owner_id, pkg)

    def set_consent(self, owner_id: str, channel_id: str, granted: bool, at_ms: int) -> None:
        self._store.set_consent(owner_id, channel_id, granted, at_ms)


class HttpVaultSink:
    """Stores packages and consent over the vault REST interface.

    Requests are retried with bounded exponential backoff; a vault that
    stays unreachable fails the run with a partial report.
    """

    def __init__(self, endpoint: str, max_attempts: int = 4, base_delay_s: float = 0.2, client=None):
        import httpx

        self.endpoint = endpoint.rstrip("/")
        self.max_attempts = max_attempts
        self.base_delay_s = base_delay_s
        self._client = client if client is not None else httpx.Client(timeout=10.0)

    def _post(self, path: str, content: bytes | None = None, json_body: Any | None = None):
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                response = self._client.post(
                    f"{self.endpoint}{path}", content=content, json=json_body
                )
                if response.status_code < 500:
                    response.raise_for_status()
                    return response
                last_error = RuntimeError(f"HTTP {response.status_code}: {response.text}")
            except Exception as exc:  # noqa: BLE001 - bounded retry, then surfaced
                if getattr(exc, "response", None) is not None:
                    raise
                last_error = exc
            time.sleep(self.base_delay_s * (2**attempt))
        raise ConnectionError(f"vault unreachable after {self.max_attempts} attempts: {last_error}")

    def store_package(self, owner_id: str, pkg: DataPackage) -> None:
        self._post(f"/owners/{owner_id}/packages", content=serialize_package(pkg))

    def set_consent(self, owner_id: str, channel_id: str, granted: bool, at_ms: int) -> None:
        self._post(
            f"/owners/{owner_id}/consent",
            json_body={"channel_id": channel_id, "granted": granted, "updated_at_ms": at_ms},
        )

    def close(self) -> None:
        self._client.close()


def run_fleet(
    config: FleetConfig,
    stack: InProcessStack | None = None,
    in_process: bool = True,
    vault_root: str | Path | None = None,
    sink: PackageSink | None = None,
) -> RunReport:
    """Simulate the fleet and push every window through the pipeline."""
    own_stack = False
    http_sink: HttpVaultSink | None = None
    if sink is None:
        if in_process:
            own_stack = stack is None
            stack = stack or InProcessStack.build(config, vault_root)
            sink = _StackSink(stack)
        else:
            if config.vault_endpoint is None:
                raise ValueError("config.vault_endpoint is required when not running in process")
            http_sink = HttpVaultSink(config.vault_endpoint)
            sink = http_sink
    try:
        return _run(config, sink)
    finally:
        if own_stack and stack is not None:
            stack.service.drain()
        if http_sink is not None:
            http_sink.close()


def _window_ctx(
    config: FleetConfig, trajectory: Trajectory, vehicle_index: int, window: int
) -> VehicleContext:
    interval = int(config.reporting_interval_s)
    start_s = window * interval
    end_s = min((window + 1) * interval, trajectory.duration_s)
    base_km = 10_000.0
    mileage_start = base_km + (trajectory.cumulative_km[start_s - 1] if start_s > 0 else 0.0)
    mileage_end = base_km + trajectory.cumulative_km[end_s - 1]
    return VehicleContext(
        vehicle_pseudonym=pseudonym_for(config.seed, vehicle_index),
        owner_id=owner_id_for(vehicle_index),
        t_start_ms=start_s * 1000,
        t_end_ms=end_s * 1000,
        mileage_start_km=mileage_start,
        mileage_end_km=mileage_end,
        positions=trajectory.positions[start_s:end_s],
        stakeholders=(SIM_OEM_ID,),
        privacy_level="fleet",
    )


def _run(config: FleetConfig, sink: PackageSink) -> RunReport:
    key = fleet_signing_key(config.seed)
    interval = config.reporting_interval_s
    trajectories = [
        generate_trajectory(config.seed, v, config.region, config.duration_s)
        for v in range(config.n_vehicles)
    ]
    harmonizers = [Harmonizer(SIM_MAPPING, key) for _ in range(config.n_vehicles)]
    report = RunReport(config.n_vehicles, config.n_windows, interval)
    packages: list[DataPackage] = []
    pending = sorted(config.consent_schedule, key=lambda c: c.at_s)
    applied = 0

    try:
        for v in range(config.n_vehicles):
            sink.set_consent(owner_id_for(v), "*", config.initial_consent_granted, 0)
        for window in range(config.n_windows):
            window_end_s = (window + 1) * interval
            while applied < len(pending) and pending[applied].at_s < window_end_s:
                change = pending[applied]
                sink.set_consent(
                    owner_id_for(change.owner_index),
                    change.channel_id,
                    change.granted,
                    int(change.at_s * 1000),
                )
                applied += 1
            for v in range(config.n_vehicles):
                readings = generate_window_readings(
                    trajectories[v],
                    config.fitment_for(v),
                    config.fields,
                    config.seed,
                    int(window * interval),
                    int(window_end_s),
                )
                ctx = _window_ctx(config, trajectories[v], v, window)
                for pkg in harmonizers[v].harmonize_window(readings, config.channels, ctx):
                    sink.store_package(owner_id_for(v), pkg)
                    packages.append(pkg)
                    report.packages_by_channel[pkg.meta.channel_id] = (
                        report.packages_by_channel.get(pkg.meta.channel_id, 0) + 1
                    )
    except ConnectionError as exc:
        report.completed = False
        report.store_errors.append({"error": str(exc)})

    report.consent_changes_applied = applied
    report.total_packages = len(packages)
    report.dropped_readings = sum(h.stats.dropped_readings for h in harmonizers)
    report.skipped_channels = sum(h.stats.skipped_channels for h in harmonizers)
    clamped: dict[str, int] = {}
    for h in harmonizers:
        for signal, count in h.stats.clamped.items():
            clamped[signal] = clamped.get(signal, 0) + count
    report.clamped_by_signal = clamped
    report.corpus_digest = corpus_digest(packages)
    return report
