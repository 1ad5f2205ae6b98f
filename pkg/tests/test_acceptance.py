"""End-to-end acceptance suite.

Every test implements one exit criterion at its stated tolerance and
prints one PASS/FAIL line (bypassing pytest capture so the lines are
always visible in the run output).
"""

from __future__ import annotations

import math
import random
import statistics
import sys
import time
from collections import defaultdict

import numpy as np
import pytest

from fleetmarket.marketplace import (
    AgreementFilter,
    delivery_record_keys,
    replay_expected_deliveries,
)
from fleetmarket.marketplace.catalog import cells_covering
from fleetmarket.model import (
    BinSpec,
    CellId,
    ChannelSpec,
    ParseError,
    SchemaError,
    SignalSample,
    TimeSeriesData,
    VehicleContext,
    build_geo_histogram,
    build_histogram,
    deserialize_package,
    downsample,
    make_package,
    merge_histograms,
    serialize_package,
    validate_package,
    zero_histogram,
)
from fleetmarket.model.histogram import HistogramData
from fleetmarket.model.serialization import payload_bytes
from fleetmarket.provider import (
    FleetAccumulator,
    fixture_key_registry,
    generate_test_packages,
    road_quality,
    weather_grid,
)
from fleetmarket.simulator import (
    ConsentChange,
    FleetConfig,
    GroundTruthFields,
    InProcessStack,
    Region,
    RoughnessField,
    RoughnessRegion,
    TemperatureField,
    owner_id_for,
    pseudonym_for,
    run_fleet,
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


# --- criterion 1: aggregator conservation --------------------------------------

def _random_bin_specs(rng, d):
    specs = []
    for _ in range(d):
        n_bins = int(rng.integers(1, 8))
        start = float(rng.uniform(-50, 50))
        widths = rng.uniform(0.5, 10, n_bins)
        edges = np.concatenate([[start], start + np.cumsum(widths)])
        specs.append(BinSpec(tuple(float(e) for e in edges)))
    return tuple(specs)


def test_aggregator_conservation_properties():
    rng = np.random.default_rng(20260810)
    started = time.monotonic()
    cases = 0
    failures: list[str] = []

    # histogram count conservation, exact
    for _ in range(2500):
        specs = _random_bin_specs(rng, int(rng.integers(1, 3)))
        n = int(rng.integers(0, 200))
        tuples = rng.uniform(-100, 150, (n, len(specs))).tolist()
        hist = build_histogram(tuples, specs)
        if hist.total_samples != n or int(hist.counts.sum()) != n:
            failures.append(f"conservation broken for n={n}")
        cases += 1

    # merge monoid laws: identity, commutativity, associativity, exact
    for _ in range(2500):
        specs = _random_bin_specs(rng, 1)
        shape = (specs[0].n_bins + 2,)
        def rand_hist():
            counts = rng.integers(0, 50, shape)
            return HistogramData(specs, counts, int(counts.sum()))
        a, b, c = rand_hist(), rand_hist(), rand_hist()
        zero = zero_histogram(specs)
        if merge_histograms(a, zero) != a:
            failures.append("identity law broken")
        if merge_histograms(a, b) != merge_histograms(b, a):
            failures.append("commutativity broken")
        if merge_histograms(merge_histograms(a, b), c) != merge_histograms(
            a, merge_histograms(b, c)
        ):
            failures.append("associativity broken")
        cases += 1

    # geo/flat consistency, exact
    for _ in range(2500):
        specs = _random_bin_specs(rng, 1)
        n = int(rng.integers(1, 100))
        values = rng.uniform(-100, 150, n)
        lats = rng.uniform(-5, 5, n)
        lons = rng.uniform(-5, 5, n)
        resolution = float(rng.choice([0.1, 0.5, 1.0]))
        samples = [([float(v)], (float(la), float(lo))) for v, la, lo in zip(values, lats, lons)]
        geo = build_geo_histogram(samples, specs, resolution)
        flat = build_histogram([[float(v)] for v in values], specs)
        if geo.merged() != flat or geo.total_samples != n:
            failures.append("geo/flat consistency broken")
        cases += 1

    # downsample count law, within +-1
    divisors = [1, 2, 4, 5, 8, 10, 20, 25, 40, 50, 100, 125, 200, 250, 500]
    for _ in range(2500):
        f = int(rng.choice(divisors))
        target = int(rng.choice([d for d in divisors if d <= f]))
        n = int(rng.integers(1, 300))
        step = 1000.0 / f
        samples = [SignalSample(int(i * step), float(v)) for i, v in enumerate(rng.uniform(0, 1, n))]
        method = "keep-first" if rng.uniform() < 0.5 else "average"
        result = downsample(samples, float(target), method)
        expected = math.ceil(n * target / f)
        if abs(len(result.series.values) - expected) > 1:
            failures.append(f"count law broken: n={n} f={f} target={target}")
        cases += 1

    elapsed = time.monotonic() - started
    _report(
        "aggregator-conservation",
        not failures and cases == 10_000 and elapsed < 60,
        f"{cases} cases in {elapsed:.1f}s" + (f"; first failure: {failures[0]}" if failures else ""),
    )


# --- criterion 2: package integrity ---------------------------------------------

def test_package_integrity_corpus():
    started = time.monotonic()
    packages = generate_test_packages(seed=77, n_vehicles=10, windows=34)[:1000]
    assert len(packages) == 1000
    registry = fixture_key_registry()

    valid = sum(1 for p in packages if validate_package(p, registry).valid)
    round_trips = sum(
        1
        for p in packages
        if serialize_package(deserialize_package(serialize_package(p))) == serialize_package(p)
    )

    flips = 0
    rejected = 0
    for pkg in packages[:50]:
        data = serialize_package(pkg)
        start = data.index(b'"payload":') + len(b'"payload":')
        for i in range(start, len(data) - 1):
            mutated = bytearray(data)
            mutated[i] ^= 0x01
            flips += 1
            try:
                candidate = deserialize_package(bytes(mutated))
            except (ParseError, SchemaError):
                rejected += 1
                continue
            if not validate_package(candidate, registry).valid:
                rejected += 1

    elapsed = time.monotonic() - started
    _report(
        "package-integrity",
        valid == 1000 and round_trips == 1000 and rejected == flips and elapsed < 120,
        f"valid {valid}/1000, round-trip {round_trips}/1000, "
        f"mutations rejected {rejected}/{flips}, {elapsed:.1f}s",
    )


# --- criterion 3: payload economy ------------------------------------------------

def test_payload_economy():
    rng = np.random.default_rng(333)
    ratios = []
    smaller = 0
    for _ in range(100):
        duration = int(rng.integers(60, 601))
        values = rng.uniform(0.0, 300.0, duration)
        ts = TimeSeriesData(1.0, 0, tuple(float(v) for v in values))
        n_bins = int(rng.integers(4, 65))
        edges = np.round(np.linspace(0.0, 300.0, n_bins + 1), 1)
        hist = build_histogram([[float(v)] for v in values], (BinSpec(tuple(float(e) for e in edges)),))
        ts_size = len(payload_bytes(ts))
        hist_size = len(payload_bytes(hist))
        ratios.append(hist_size / ts_size)
        smaller += hist_size < ts_size
    median_ratio = statistics.median(ratios)
    _report(
        "payload-economy",
        smaller == 100,
        f"{smaller}/100 histogram payloads smaller, median size ratio {median_ratio:.3f}",
    )


# --- fleet configs shared by the run-based criteria -----------------------------

REGION = Region(lat_min=50.0, lat_max=50.5, lon_min=8.0, lon_max=8.5)

TEMP_TS = ChannelSpec(
    channel_id="temp_std",
    channel_type="time_series",
    source_signals=("outside_temperature",),
    reporting_interval_s=60.0,
    tsmc_rate_hz=1.0,
    tsmc_method="average",
)
TEMP_GEO = ChannelSpec(
    channel_id="temp_geo",
    channel_type="geo_histogram",
    source_signals=("outside_temperature",),
    reporting_interval_s=60.0,
    bin_specs=(BinSpec(tuple(float(v) for v in range(-40, 61))),),
    geo_resolution_deg=0.1,
)
ACCEL_GEO = ChannelSpec(
    channel_id="vert_accel_geo",
    channel_type="geo_histogram",
    source_signals=("vertical_acceleration",),
    reporting_interval_s=60.0,
    bin_specs=(BinSpec(tuple(float(v) * 0.25 for v in range(-20, 21))),),
    geo_resolution_deg=0.05,
)

LINEAR_FIELD = GroundTruthFields(
    temperature=TemperatureField(
        t0_degc=10.0, lat0=50.0, lon0=8.0, a_degc_per_deg=1.0, b_degc_per_deg=1.0
    )
)


def temp_fleet_config(n_vehicles, duration_s, seed, consent_schedule=()):
    return FleetConfig(
        n_vehicles=n_vehicles,
        duration_s=duration_s,
        seed=seed,
        region=REGION,
        channels=(TEMP_TS, TEMP_GEO),
        default_fitment=("outside_temperature",),
        fields=LINEAR_FIELD,
        consent_schedule=tuple(consent_schedule),
    )


# --- criterion 4: pull/push equivalence ------------------------------------------

def test_pull_push_equivalence(tmp_path):
    started = time.monotonic()
    config = temp_fleet_config(10, 300, seed=404)
    stack = InProcessStack.build(config, tmp_path / "vaults")
    try:
        channels = ["temp_std", "temp_geo"]
        push_ag = stack.service.create_agreement("prov-eq", channels, mode="push")
        pull_ag = stack.service.create_agreement("prov-eq", channels, mode="pull")
        run_fleet(config, stack=stack)
        stack.service.drain()
        stack.service.pull("prov-eq", pull_ag.agreement_id)
        records = stack.service.delivery_records()
        pushed = {r.package_id for r in records if r.agreement_id == push_ag.agreement_id}
        pulled = {r.package_id for r in records if r.agreement_id == pull_ag.agreement_id}
        elapsed = time.monotonic() - started
        _report(
            "pull-push-equivalence",
            pushed == pulled and len(pushed) == 10 * 5 * 2 and elapsed < 120,
            f"{len(pushed)} packages via push == {len(pulled)} via pull, {elapsed:.1f}s",
        )
    finally:
        stack.close()


# --- criterion 5: mid-run revocation ----------------------------------------------

def test_revocation_mid_run(tmp_path):
    revoked_owner_index = 3
    config = temp_fleet_config(
        10,
        300,
        seed=505,
        consent_schedule=(
            ConsentChange(at_s=150.0, owner_index=revoked_owner_index, channel_id="*", granted=False),
        ),
    )
    stack = InProcessStack.build(config, tmp_path / "vaults")
    try:
        stack.service.create_agreement("prov-rev", ["temp_std", "temp_geo"], mode="push")
        run_fleet(config, stack=stack)
        stack.service.drain()

        events = stack.service.events()
        revoked_owner = owner_id_for(revoked_owner_index)
        revoke_index = next(
            i
            for i, e in enumerate(events)
            if e["kind"] == "consent" and e["owner_id"] == revoked_owner and not e["granted"]
        )
        post_revocation_ids = {
            e["meta"]["package_id"]
            for i, e in enumerate(events)
            if i > revoke_index and e["kind"] == "ingest" and e["owner_id"] == revoked_owner
        }
        records = stack.service.delivery_records()
        leaked = [r for r in records if r.package_id in post_revocation_ids]

        revoked_vehicle = pseudonym_for(config.seed, revoked_owner_index)
        per_vehicle = defaultdict(int)
        for r in records:
            per_vehicle[r.vehicle_pseudonym] += 1
        others_complete = all(
            per_vehicle[pseudonym_for(config.seed, v)] == 5 * 2
            for v in range(10)
            if v != revoked_owner_index
        )

        expected = replay_expected_deliveries(
            events, {c.channel_id: c.quality_tier for c in config.channels}
        )
        exact = delivery_record_keys(records) == expected

        _report(
            "revocation-mid-run",
            not leaked and others_complete and exact and per_vehicle[revoked_vehicle] < 10,
            f"0 post-revocation deliveries (revoked vehicle got {per_vehicle[revoked_vehicle]}, "
            f"others 10 each); record set matches reference router",
        )
    finally:
        stack.close()


# --- criterion 6: routing soundness over randomized scenarios ----------------------

from fleetmarket.marketplace import InProcessVaultAccessor, MarketplaceService
from fleetmarket.model import KeyRegistry, SigningKey, validate_channel_specs, SIGNAL_CATALOG
from fleetmarket.vault import VaultStore

SCENARIO_KEY = SigningKey.from_seed("scenario-oem", b"routing scenarios")
SCENARIO_SPEED = ChannelSpec(
    channel_id="speed_ts",
    channel_type="time_series",
    source_signals=("vehicle_speed",),
    reporting_interval_s=60.0,
    tsmc_rate_hz=1.0,
    tsmc_method="keep-first",
)
SCENARIO_TEMP = ChannelSpec(
    channel_id="temp_hi",
    channel_type="time_series",
    source_signals=("outside_temperature",),
    reporting_interval_s=60.0,
    quality_tier="high",
    tsmc_rate_hz=1.0,
    tsmc_method="average",
)


def _scenario_package(owner, vehicle, channel_spec, seq, lat, lon):
    t0 = seq * 60_000
    ctx = VehicleContext(
        vehicle_pseudonym=vehicle,
        owner_id=owner,
        t_start_ms=t0,
        t_end_ms=t0 + 60_000,
        mileage_start_km=float(seq),
        mileage_end_km=float(seq + 1),
        positions=((lat, lon), (lat + 0.01, lon + 0.01)),
    )
    payload = TimeSeriesData(1.0, t0, tuple(10.0 + seq + i for i in range(3)))
    return make_package(channel_spec, payload, ctx, SCENARIO_KEY, seq)


def _oracle_catalog(events, resolution):
    """Independent catalog fold over the raw event log."""
    consent: dict[tuple[str, str], tuple[bool, int]] = {}

    def allows(owner, channel):
        if (owner, channel) in consent:
            return consent[(owner, channel)][0]
        if (owner, "*") in consent:
            return consent[(owner, "*")][0]
        return False

    indexed = []
    now = 0
    for e in events:
        if e["kind"] == "consent":
            key = (e["owner_id"], e["channel_id"])
            if key not in consent or e["at_ms"] >= consent[key][1]:
                consent[key] = (e["granted"], e["at_ms"])
        elif e["kind"] == "ingest":
            now = max(now, e["meta"]["t_end_ms"])
            if allows(e["owner_id"], e["meta"]["channel_id"]):
                indexed.append(e["meta"])
    by_channel = defaultdict(list)
    for meta in indexed:
        by_channel[meta["channel_id"]].append(meta)
    entries = {}
    for channel, metas in by_channel.items():
        starts = [m["t_start_ms"] for m in metas]
        first = min(starts)
        day_ms = 24 * 3600 * 1000
        in_window = sum(1 for s in starts if s >= now - day_ms)
        elapsed = now - max(first, now - day_ms)
        freq = in_window / (elapsed / 3_600_000) if elapsed > 0 else float(in_window)
        cells = set()
        hours = [0] * 24
        for m in metas:
            if m["geo_bounds"] is not None:
                cells |= cells_covering(tuple(m["geo_bounds"]), resolution)
            hours[(m["t_start_ms"] // 3_600_000) % 24] += 1
        entries[channel] = {
            "package_count": len(metas),
            "vehicle_count": len({m["vehicle_pseudonym"] for m in metas}),
            "first": first,
            "last": max(starts),
            "freq": freq,
            "cells": cells,
            "hours": tuple(hours),
        }
    return entries


def test_routing_soundness_randomized(tmp_path):
    specs = validate_channel_specs([SCENARIO_SPEED, SCENARIO_TEMP], SIGNAL_CATALOG)
    tiers = {c: s.quality_tier for c, s in specs.items()}
    registry = KeyRegistry([SCENARIO_KEY.public])
    mismatches = []

    for scenario in range(20):
        rng = random.Random(6000 + scenario)
        store = VaultStore(tmp_path / f"s{scenario}", registry)
        service = MarketplaceService(
            specs, InProcessVaultAccessor(store), broker_base_delay_s=0.001
        )
        store.on_ingest = lambda meta, owner, s=service: s.ingest_meta(meta, owner)
        store.on_consent = lambda rec, s=service: s.notify_consent(
            rec.owner_id, rec.channel_id, rec.granted, rec.updated_at_ms
        )
        owners = [f"o{scenario}-{i}" for i in range(rng.randint(2, 4))]
        seqs: dict[tuple[str, str], int] = defaultdict(int)
        agreements = []
        consent_clock = 0

        for owner in owners:
            if rng.random() < 0.8:
                store.set_consent(owner, "*", True, consent_clock)
                consent_clock += 1

        for _ in range(rng.randint(15, 30)):
            action = rng.choices(
                ["store", "consent", "agree", "terminate", "pull"],
                weights=[5, 2, 2, 1, 2],
            )[0]
            if action == "store":
                owner = rng.choice(owners)
                vehicle = f"v-{owner}"
                spec = rng.choice([SCENARIO_SPEED, SCENARIO_TEMP])
                seq = seqs[(vehicle, spec.channel_id)]
                seqs[(vehicle, spec.channel_id)] += 1
                lat = rng.uniform(47.0, 49.0)
                lon = rng.uniform(10.0, 12.0)
                store.store_package(owner, _scenario_package(owner, vehicle, spec, seq, lat, lon))
            elif action == "consent":
                owner = rng.choice(owners)
                channel = rng.choice(["*", "speed_ts", "temp_hi"])
                store.set_consent(owner, channel, rng.random() < 0.5, consent_clock)
                consent_clock += 1
            elif action == "agree":
                filter_kind = rng.choice(["none", "geo", "time", "age", "tier"])
                flt = AgreementFilter()
                if filter_kind == "geo":
                    lat0 = rng.uniform(46.5, 48.5)
                    flt = AgreementFilter(geo_bounds=(lat0, lat0 + 1.0, 9.5, 11.5))
                elif filter_kind == "time":
                    flt = AgreementFilter(min_t_start_ms=rng.randint(0, 5) * 60_000)
                elif filter_kind == "age":
                    flt = AgreementFilter(max_age_ms=rng.randint(1, 6) * 60_000)
                elif filter_kind == "tier":
                    flt = AgreementFilter(quality_tier=rng.choice(["standard", "high"]))
                channels = rng.choice([["speed_ts"], ["temp_hi"], ["speed_ts", "temp_hi"]])
                mode = rng.choice(["pull", "push"])
                agreements.append(
                    service.create_agreement(f"p{scenario}", channels, filter=flt, mode=mode)
                )
            elif action == "terminate" and agreements:
                target = rng.choice(agreements)
                service.terminate(target.agreement_id, rng.choice(["provider", "owner-scope"]))
            elif action == "pull":
                pullable = [a for a in agreements if a.mode == "pull" and a.active]
                if pullable:
                    service.pull(f"p{scenario}", rng.choice(pullable).agreement_id)
        service.drain()

        expected = replay_expected_deliveries(service.events(), tiers)
        actual = delivery_record_keys(service.delivery_records())
        if actual != expected:
            mismatches.append(f"scenario {scenario}: {len(actual ^ expected)} differing keys")

        oracle = _oracle_catalog(service.events(), service.index_resolution_deg)
        live = {e.channel_id: e for e in service.catalog()}
        if set(oracle) != set(live):
            mismatches.append(f"scenario {scenario}: catalog channels differ")
        else:
            for channel, expect in oracle.items():
                entry = live[channel]
                if (
                    entry.package_count != expect["package_count"]
                    or entry.vehicle_count != expect["vehicle_count"]
                    or entry.first_t_start_ms != expect["first"]
                    or entry.last_t_start_ms != expect["last"]
                    or set(entry.geo_coverage) != expect["cells"]
                    or entry.time_histogram != expect["hours"]
                    or not math.isclose(
                        entry.update_frequency_per_h, expect["freq"], rel_tol=1e-12
                    )
                ):
                    mismatches.append(f"scenario {scenario}: catalog entry {channel} differs")
        service.close()

    _report(
        "routing-soundness",
        not mismatches,
        "20 randomized scenarios match the reference router"
        + (f"; {mismatches[0]}" if mismatches else ""),
    )


# --- criterion 7: weather ground truth ---------------------------------------------

def test_weather_ground_truth(tmp_path):
    config = FleetConfig(
        n_vehicles=20,
        duration_s=600,
        seed=707,
        region=REGION,
        channels=(TEMP_GEO,),
        default_fitment=("outside_temperature",),
        fields=LINEAR_FIELD,
    )
    stack = InProcessStack.build(config, tmp_path / "vaults")
    try:
        agreement = stack.service.create_agreement("prov-wx", ["temp_geo"], mode="pull")
        run_fleet(config, stack=stack)
        stack.service.drain()
        batch = stack.service.pull("prov-wx", agreement.agreement_id)
        acc = FleetAccumulator({"temp_geo": TEMP_GEO}, stack.key_registry)
        for pkg in batch.packages:
            assert acc.accumulate(pkg).accepted
        grid = weather_grid(acc, "temp_geo")

        checked = 0
        worst = 0.0
        violations = 0
        for cell, stat in grid.cells.items():
            if stat.sample_count < 100:
                continue
            checked += 1
            lat, lon = cell.center(0.1)
            truth = config.fields.temperature_at(lat, lon)
            error = abs(stat.mean_temp_degc - truth)
            worst = max(worst, error)
            if error > 0.5:
                violations += 1
        _report(
            "weather-ground-truth",
            checked >= 5 and violations == 0,
            f"{checked} cells with >=100 samples, worst error {worst:.3f} degC (limit 0.5)",
        )
    finally:
        stack.close()


# --- criterion 8: road quality ranking ----------------------------------------------

def test_road_quality_ranking(tmp_path):
    rough_lon_min = 8.25  # aligned to the 0.05 deg grid: no mixed cells
    config = FleetConfig(
        n_vehicles=20,
        duration_s=300,
        seed=808,
        region=REGION,
        channels=(ACCEL_GEO,),
        default_fitment=("vertical_acceleration",),
        fields=GroundTruthFields(
            roughness=RoughnessField(
                default_sigma_mps2=0.2,
                regions=(RoughnessRegion(50.0, 50.5, rough_lon_min, 8.5, sigma_mps2=1.0),),
            )
        ),
    )
    stack = InProcessStack.build(config, tmp_path / "vaults")
    try:
        agreement = stack.service.create_agreement("prov-rq", ["vert_accel_geo"], mode="pull")
        run_fleet(config, stack=stack)
        stack.service.drain()
        batch = stack.service.pull("prov-rq", agreement.agreement_id)
        acc = FleetAccumulator({"vert_accel_geo": ACCEL_GEO}, stack.key_registry)
        for pkg in batch.packages:
            assert acc.accumulate(pkg).accepted
        rq = road_quality(acc, "vert_accel_geo")

        rough_cells = []
        smooth_cells = []
        for cell, stat in rq.cells.items():
            if stat.sample_count < 200:
                continue
            _, lon = cell.center(0.05)
            (rough_cells if lon >= rough_lon_min else smooth_cells).append(stat.roughness_score)
        pairs = len(rough_cells) * len(smooth_cells)
        correct = sum(1 for r in rough_cells for s in smooth_cells if r > s)
        _report(
            "road-quality-ranking",
            pairs >= 20 and correct / pairs >= 0.95,
            f"{correct}/{pairs} rough/smooth cell pairs ranked correctly "
            f"({len(rough_cells)} rough, {len(smooth_cells)} smooth cells)",
        )
    finally:
        stack.close()


# --- criterion 9: determinism ----------------------------------------------------------

def test_run_determinism(tmp_path):
    config = temp_fleet_config(5, 180, seed=909)
    digests = []
    for i in range(2):
        stack = InProcessStack.build(config, tmp_path / f"run{i}")
        try:
            report = run_fleet(config, stack=stack)
            stack.service.drain()
            digests.append(report.corpus_digest)
        finally:
            stack.close()
    _report(
        "run-determinism",
        digests[0] == digests[1] and bool(digests[0]),
        f"corpus digest {digests[0][:16]}... reproduced",
    )


# --- criterion 10: sequence gap detection ------------------------------------------------

def test_sequence_gap_detection(tmp_path):
    from fleetmarket.model import canonical
    from fleetmarket.vault import owner_token

    config = FleetConfig(
        n_vehicles=1,
        duration_s=300,
        seed=111,
        region=REGION,
        channels=(TEMP_TS,),
        default_fitment=("outside_temperature",),
        fields=LINEAR_FIELD,
    )
    root = tmp_path / "vaults"
    stack = InProcessStack.build(config, root)
    try:
        run_fleet(config, stack=stack)
        stack.service.drain()
        registry = stack.key_registry
    finally:
        stack.close()

    # simulate storage loss of the sequence-2 package
    owner = owner_id_for(0)
    vehicle = pseudonym_for(config.seed, 0)
    index_path = root / "owners" / owner / "index.json"
    entries = canonical.decode(index_path.read_bytes())
    victims = [e for e in entries if e["sequence_no"] == 2]
    assert len(victims) == 1
    (root / "owners" / owner / "packages" / f"{victims[0]['package_id']}.pkg").unlink()
    index_path.write_bytes(canonical.encode([e for e in entries if e["sequence_no"] != 2]))

    reopened = VaultStore(root, registry)
    packages = reopened.fetch_packages(owner, "temp_std", -1, owner_token(owner))
    acc = FleetAccumulator({"temp_std": TEMP_TS}, registry)
    for pkg in packages:
        assert acc.accumulate(pkg).accepted
    report = acc.gap_report()
    _report(
        "sequence-gap-detection",
        report == {(vehicle, "temp_std"): (2,)},
        f"gap report: {dict(report)}",
    )
