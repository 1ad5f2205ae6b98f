"""Pure reference router: replays the marketplace event log and derives
the exact set of deliveries that *should* have happened.

This is a from-scratch reimplementation of the routing rules over plain
dict events, kept deliberately independent of the live service's
bookkeeping so the two can be compared in tests: every delivery the
service records must be justified by the log, and vice versa.

Rules replayed:
  - consent: opt-in, specific channel overrides wildcard, latest wins
  - push: routed at ingest time if an active push agreement matches
  - pull: everything in the vault newer than the cursor at pull time,
    consent checked at pull time; cursors advance per (agreement,
    vehicle, channel) past every fetched package, skipping owners whose
    vault errored
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

ExpectedDelivery = tuple[str, str, str]  # (agreement_id, package_id, mode)


def _intersects(a: list, b: list) -> bool:
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


def _filter_matches(
    flt: Mapping[str, Any], meta: Mapping[str, Any], now_ms: int, tiers: Mapping[str, str]
) -> bool:
    bounds = flt.get("geo_bounds")
    if bounds is not None:
        if meta["geo_bounds"] is None or not _intersects(list(meta["geo_bounds"]), list(bounds)):
            return False
    min_start = flt.get("min_t_start_ms")
    if min_start is not None and meta["t_start_ms"] < min_start:
        return False
    max_age = flt.get("max_age_ms")
    if max_age is not None and now_ms - meta["t_end_ms"] > max_age:
        return False
    tier = flt.get("quality_tier")
    if tier is not None and tiers.get(meta["channel_id"]) != tier:
        return False
    return True


class _ConsentState:
    def __init__(self) -> None:
        # owner -> channel (or "*") -> (granted, at_ms)
        self._records: dict[str, dict[str, tuple[bool, int]]] = {}

    def update(self, owner: str, channel: str, granted: bool, at_ms: int) -> None:
        per_owner = self._records.setdefault(owner, {})
        current = per_owner.get(channel)
        if current is None or at_ms >= current[1]:
            per_owner[channel] = (granted, at_ms)

    def allows(self, owner: str, channel: str) -> bool:
        per_owner = self._records.get(owner, {})
        if channel in per_owner:
            return per_owner[channel][0]
        if "*" in per_owner:
            return per_owner["*"][0]
        return False


def replay_expected_deliveries(
    events: Iterable[Mapping[str, Any]],
    quality_tiers: Mapping[str, str] | None = None,
) -> set[ExpectedDelivery]:
    """Derive the expected (agreement, package, mode) set from the log."""
    tiers = dict(quality_tiers or {})
    consent = _ConsentState()
    agreements: dict[str, dict[str, Any]] = {}
    # (owner, channel) -> list of meta dicts, in ingest order
    vault: dict[tuple[str, str], list[Mapping[str, Any]]] = {}
    owners: set[str] = set()
    cursors: dict[tuple[str, str, str], int] = {}
    now_ms = 0
    expected: set[ExpectedDelivery] = set()

    for event in events:
        kind = event["kind"]
        if kind == "consent":
            consent.update(
                event["owner_id"], event["channel_id"], event["granted"], event["at_ms"]
            )
        elif kind == "agreement_create":
            agreements[event["agreement_id"]] = {
                "channels": list(event["channel_ids"]),
                "filter": event["filter"],
                "mode": event["mode"],
                "active": True,
            }
        elif kind == "agreement_terminate":
            agreements[event["agreement_id"]]["active"] = False
        elif kind == "ingest":
            meta = event["meta"]
            owner = event["owner_id"]
            owners.add(owner)
            now_ms = max(now_ms, meta["t_end_ms"])
            vault.setdefault((owner, meta["channel_id"]), []).append(meta)
            if not consent.allows(owner, meta["channel_id"]):
                continue
            for agreement_id, ag in agreements.items():
                if (
                    ag["active"]
                    and ag["mode"] == "push"
                    and meta["channel_id"] in ag["channels"]
                    and _filter_matches(ag["filter"], meta, now_ms, tiers)
                ):
                    expected.add((agreement_id, meta["package_id"], "push"))
        elif kind == "pull":
            agreement_id = event["agreement_id"]
            ag = agreements[agreement_id]
            errored = set(event.get("vault_errors", []))
            for owner in sorted(owners):
                if owner in errored:
                    continue
                for channel in ag["channels"]:
                    if not consent.allows(owner, channel):
                        continue
                    top_seen: dict[str, int] = {}
                    for meta in vault.get((owner, channel), []):
                        vehicle = meta["vehicle_pseudonym"]
                        key = (agreement_id, vehicle, channel)
                        if meta["sequence_no"] <= cursors.get(key, -1):
                            continue
                        top_seen[vehicle] = max(top_seen.get(vehicle, -1), meta["sequence_no"])
                        if _filter_matches(ag["filter"], meta, now_ms, tiers):
                            expected.add((agreement_id, meta["package_id"], "pull"))
                    for vehicle, top in top_seen.items():
                        key = (agreement_id, vehicle, channel)
                        cursors[key] = max(cursors.get(key, -1), top)
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    return expected


def delivery_record_keys(records: Iterable) -> set[ExpectedDelivery]:
    """Project live DeliveryRecords onto comparable (agreement, package, mode) keys."""
    return {(r.agreement_id, r.package_id, r.mode) for r in records}
