"""Valid signed test packages for provider development.

Providers integrating against the marketplace need realistic data long
before they have an agreement with real vehicles; this generator emits
a deterministic, correctly signed corpus from fixed keys.
"""

from __future__ import annotations

import numpy as np

from ..model import (
    BinSpec,
    ChannelSpec,
    DataPackage,
    KeyRegistry,
    SigningKey,
    TimeSeriesData,
    VehicleContext,
    build_geo_histogram,
    build_histogram,
    make_package,
)

TEST_KEY_SEED = b"fleetmarket test data key v1"

TEST_CHANNELS: dict[str, ChannelSpec] = {
    spec.channel_id: spec
    for spec in (
        ChannelSpec(
            channel_id="speed_ts_std",
            channel_type="time_series",
            source_signals=("vehicle_speed",),
            reporting_interval_s=60.0,
            tsmc_rate_hz=1.0,
            tsmc_method="keep-first",
        ),
        ChannelSpec(
            channel_id="speed_engine_hist",
            channel_type="histogram",
            source_signals=("vehicle_speed", "engine_speed"),
            reporting_interval_s=60.0,
            bin_specs=(
                BinSpec(tuple(float(v) for v in range(0, 260, 20))),
                BinSpec(tuple(float(v) for v in range(0, 9000, 1000))),
            ),
        ),
        ChannelSpec(
            channel_id="temp_geo",
            channel_type="geo_histogram",
            source_signals=("outside_temperature",),
            reporting_interval_s=60.0,
            bin_specs=(BinSpec(tuple(float(v) for v in range(-40, 61, 1))),),
            geo_resolution_deg=0.1,
        ),
    )
}


def fixture_signing_key() -> SigningKey:
    return SigningKey.from_seed("testdata", TEST_KEY_SEED)


def fixture_key_registry() -> KeyRegistry:
    return KeyRegistry([fixture_signing_key().public])


def generate_test_packages(
    seed: int = 0,
    n_vehicles: int = 3,
    windows: int = 4,
    interval_s: float = 60.0,
) -> list[DataPackage]:
    """A deterministic mixed-channel corpus of valid packages."""
    key = fixture_signing_key()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xFEED]))
    packages: list[DataPackage] = []
    for v in range(n_vehicles):
        vehicle = f"testveh-{v:03d}"
        owner = f"testowner-{v:03d}"
        lat0 = 48.0 + rng.uniform(-0.2, 0.2)
        lon0 = 11.0 + rng.uniform(-0.2, 0.2)
        odo = float(rng.integers(10_000, 100_000))
        for w in range(windows):
            t0 = int(w * interval_s * 1000)
            t1 = int((w + 1) * interval_s * 1000)
            n_seconds = int(interval_s)
            lats = lat0 + rng.normal(0, 0.01, n_seconds).cumsum()
            lons = lon0 + rng.normal(0, 0.01, n_seconds).cumsum()
            ctx = VehicleContext(
                vehicle_pseudonym=vehicle,
                owner_id=owner,
                t_start_ms=t0,
                t_end_ms=t1,
                mileage_start_km=odo + w,
                mileage_end_km=odo + w + 1,
                positions=tuple((float(la), float(lo)) for la, lo in zip(lats, lons)),
                stakeholders=("testdata",),
                privacy_level="fleet",
            )
            speeds = np.clip(rng.normal(60, 25, n_seconds), 0, 250)
            engine = np.clip(800 + speeds * 40 + rng.normal(0, 50, n_seconds), 0, 7900)
            temps = rng.normal(12, 4, n_seconds)

            spec = TEST_CHANNELS["speed_ts_std"]
            packages.append(
                make_package(
                    spec,
                    TimeSeriesData(1.0, t0, tuple(float(s) for s in speeds)),
                    ctx,
                    key,
                    w,
                )
            )
            spec = TEST_CHANNELS["speed_engine_hist"]
            assert spec.bin_specs is not None
            packages.append(
                make_package(
                    spec,
                    build_histogram(np.column_stack([speeds, engine]).tolist(), spec.bin_specs),
                    ctx,
                    key,
                    w,
                )
            )
            spec = TEST_CHANNELS["temp_geo"]
            assert spec.bin_specs is not None and spec.geo_resolution_deg is not None
            samples = [
                ([float(t)], (float(la), float(lo))) for t, la, lo in zip(temps, lats, lons)
            ]
            packages.append(
                make_package(
                    spec,
                    build_geo_histogram(samples, spec.bin_specs, spec.geo_resolution_deg),
                    ctx,
                    key,
                    w,
                )
            )
    return packages
