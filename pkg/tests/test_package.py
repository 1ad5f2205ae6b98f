import hashlib

import numpy as np
import pytest

from fleetmarket.model import (
    BinSpec,
    ChannelSpec,
    GeoHistogramData,
    HistogramData,
    KeyRegistry,
    SigningKey,
    TimeSeriesData,
    VehicleContext,
    build_geo_histogram,
    build_histogram,
    make_package,
    payload_statistics,
    validate_package,
)
from fleetmarket.model.serialization import payload_bytes

KEY = SigningKey.from_seed("test-producer", b"fixed test key")
REGISTRY = KeyRegistry([KEY.public])

TS_SPEC = ChannelSpec(
    channel_id="speed_tsmc_std",
    channel_type="time_series",
    source_signals=("vehicle_speed",),
    reporting_interval_s=60.0,
    tsmc_rate_hz=1.0,
    tsmc_method="keep-first",
)

HIST_SPEC = ChannelSpec(
    channel_id="speed_hmc",
    channel_type="histogram",
    source_signals=("vehicle_speed",),
    reporting_interval_s=60.0,
    bin_specs=(BinSpec((0.0, 50.0, 100.0, 150.0)),),
)

GEO_SPEC = ChannelSpec(
    channel_id="temp_ghmc",
    channel_type="geo_histogram",
    source_signals=("outside_temperature",),
    reporting_interval_s=60.0,
    bin_specs=(BinSpec((19.0, 21.0, 23.0)),),
    geo_resolution_deg=0.1,
)


def ctx(**overrides):
    defaults = dict(
        vehicle_pseudonym="veh-001",
        owner_id="owner-1",
        t_start_ms=0,
        t_end_ms=60_000,
        mileage_start_km=1000.0,
        mileage_end_km=1001.2,
        positions=((48.1, 11.5), (48.2, 11.6)),
    )
    defaults.update(overrides)
    return VehicleContext(**defaults)


def test_time_series_statistics():
    payload = TimeSeriesData(1.0, 0, (10.0, 20.0, 30.0))
    pkg = make_package(TS_SPEC, payload, ctx(), KEY, 0)
    assert pkg.meta.stat_min == 10.0
    assert pkg.meta.stat_max == 30.0
    assert pkg.meta.stat_avg == 20.0
    assert pkg.meta.geo_bounds == (48.1, 48.2, 11.5, 11.6)


def test_checksum_matches_external_sha256():
    payload = TimeSeriesData(1.0, 0, (10.0, 20.0, 30.0))
    pkg = make_package(TS_SPEC, payload, ctx(), KEY, 0)
    # independent oracle: hand-written canonical payload text
    expected_bytes = b'{"kind":"time_series","rate_hz":1.0,"t0_ms":0,"values":[10.0,20.0,30.0]}'
    assert payload_bytes(payload) == expected_bytes
    assert pkg.meta.checksum == hashlib.sha256(expected_bytes).hexdigest()


def test_deterministic_package_id_and_signature():
    payload = TimeSeriesData(1.0, 0, (10.0, 20.0, 30.0))
    a = make_package(TS_SPEC, payload, ctx(), KEY, 3)
    b = make_package(TS_SPEC, payload, ctx(), KEY, 3)
    assert a == b
    c = make_package(TS_SPEC, payload, ctx(), KEY, 4)
    assert c.meta.package_id != a.meta.package_id


def test_payload_type_mismatch_rejected():
    hist = build_histogram([[10.0]], HIST_SPEC.bin_specs)
    with pytest.raises(ValueError, match="expects a time_series payload"):
        make_package(TS_SPEC, hist, ctx(), KEY, 0)


def test_rate_mismatch_rejected():
    payload = TimeSeriesData(2.0, 0, (1.0,))
    with pytest.raises(ValueError, match="rate"):
        make_package(TS_SPEC, payload, ctx(), KEY, 0)


def test_histogram_stats_use_finite_midpoints():
    # values 10 (bin [0,50) mid 25), 60, 60 (bin [50,100) mid 75), 200 (overflow)
    hist = build_histogram([[10.0], [60.0], [60.0], [200.0]], HIST_SPEC.bin_specs)
    stats = payload_statistics(hist)
    assert stats.stat_min == 25.0
    assert stats.stat_max == 75.0
    assert stats.stat_avg == (25.0 + 75.0 + 75.0) / 3
    assert stats.excluded_samples == 1


def test_multidim_histogram_stats_cover_all_dims():
    specs = (BinSpec((0.0, 10.0)), BinSpec((100.0, 200.0)))
    hist = build_histogram([[5.0, 150.0]], specs)
    stats = payload_statistics(hist)
    assert stats.stat_min == 5.0
    assert stats.stat_max == 150.0
    assert stats.stat_avg == (5.0 + 150.0) / 2
    assert stats.scalar_count == 2


def test_geo_histogram_stats_combine_cells():
    samples = [([20.0], (48.0, 11.0)), ([22.0], (49.0, 12.0))]
    geo = build_geo_histogram(samples, GEO_SPEC.bin_specs, 0.1)
    stats = payload_statistics(geo)
    assert stats.stat_min == 20.0  # midpoint of [19,21)
    assert stats.stat_max == 22.0  # midpoint of [21,23)
    assert stats.stat_avg == 21.0


def test_fresh_package_validates_clean():
    payload = TimeSeriesData(1.0, 0, (10.0, 20.0, 30.0))
    pkg = make_package(TS_SPEC, payload, ctx(), KEY, 0)
    report = validate_package(pkg, REGISTRY)
    assert report.valid, report.failed()


def test_geo_package_validates_clean():
    samples = [([20.0], (48.0, 11.0)), ([22.0], (49.0, 12.0)), ([99.0], (48.0, 11.0))]
    geo = build_geo_histogram(samples, GEO_SPEC.bin_specs, 0.1)
    pkg = make_package(GEO_SPEC, geo, ctx(), KEY, 0)
    report = validate_package(pkg, REGISTRY)
    assert report.valid, report.failed()
    assert any("under/overflow" in n for n in report.notes)


def test_perturbed_stat_avg_fails_statistics_check():
    from dataclasses import replace

    payload = TimeSeriesData(1.0, 0, (10.0, 20.0, 30.0))
    pkg = make_package(TS_SPEC, payload, ctx(), KEY, 0)
    tampered = replace(pkg, meta=replace(pkg.meta, stat_avg=pkg.meta.stat_avg + 1e-3))
    report = validate_package(tampered, REGISTRY)
    assert not report.check("statistics").passed
    # signature covers meta, so it fails too; checksum covers only the payload
    assert not report.check("signature").passed
    assert report.check("checksum").passed


def test_wrong_key_fails_signature_only():
    other = SigningKey.from_seed("other", b"different key")
    payload = TimeSeriesData(1.0, 0, (10.0,))
    pkg = make_package(TS_SPEC, payload, ctx(), other, 0)
    report = validate_package(pkg, REGISTRY)
    assert not report.check("signature").passed
    assert report.check("checksum").passed


def test_tampered_counts_fail_conservation():
    hist = build_histogram([[10.0], [60.0]], HIST_SPEC.bin_specs)
    pkg = make_package(HIST_SPEC, hist, ctx(), KEY, 0)
    counts = pkg.payload.counts.copy()
    counts[1] += 1
    from dataclasses import replace

    tampered = replace(pkg, payload=HistogramData(hist.bin_specs, counts, hist.total_samples))
    report = validate_package(tampered, REGISTRY)
    assert not report.check("count_conservation").passed
    assert not report.check("checksum").passed


def test_no_positions_means_null_bounds():
    payload = TimeSeriesData(1.0, 0, (1.0,))
    pkg = make_package(TS_SPEC, payload, ctx(positions=None), KEY, 0)
    assert pkg.meta.geo_bounds is None
    assert validate_package(pkg, REGISTRY).valid


def test_context_rejects_inverted_windows():
    with pytest.raises(ValueError):
        ctx(t_start_ms=10, t_end_ms=5)
    with pytest.raises(ValueError):
        ctx(mileage_start_km=10.0, mileage_end_km=5.0)
