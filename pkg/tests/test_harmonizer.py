import pytest

from fleetmarket.harmonizer import (
    Harmonizer,
    MappingEntry,
    MappingTable,
    ProprietaryReading,
    UnknownRawCodeError,
    load_mapping_tables,
    map_reading,
)
from fleetmarket.model import (
    BinSpec,
    ChannelSpec,
    KeyRegistry,
    SigningKey,
    VehicleContext,
    serialize_package,
    validate_package,
)

KEY = SigningKey.from_seed("oem-test", b"harmonizer tests")
REGISTRY = KeyRegistry([KEY.public])

TABLE = MappingTable(
    "oem-test",
    {
        "can_0x0c6": MappingEntry("engine_speed", 0.25, 0.0, "raw quarter-rpm"),
        "can_0x0d0": MappingEntry("vehicle_speed", 0.01, 0.0),
        "can_0x2a4": MappingEntry("outside_temperature", 0.1, -40.0),
        "can_0x310": MappingEntry("humidity", 0.5, 0.0),
    },
)

ENGINE_STD = ChannelSpec(
    channel_id="engine_speed_std",
    channel_type="time_series",
    source_signals=("engine_speed",),
    reporting_interval_s=60.0,
    tsmc_rate_hz=1.0,
    tsmc_method="keep-first",
)
ENGINE_HIGH = ChannelSpec(
    channel_id="engine_speed_high",
    channel_type="time_series",
    source_signals=("engine_speed",),
    reporting_interval_s=60.0,
    quality_tier="high",
    tsmc_rate_hz=100.0,
    tsmc_method="keep-first",
)
HUMIDITY_TS = ChannelSpec(
    channel_id="humidity_std",
    channel_type="time_series",
    source_signals=("humidity",),
    reporting_interval_s=60.0,
    tsmc_rate_hz=1.0,
    tsmc_method="average",
)
SPEED_ENGINE_HIST = ChannelSpec(
    channel_id="speed_engine_hist",
    channel_type="histogram",
    source_signals=("vehicle_speed", "engine_speed"),
    reporting_interval_s=60.0,
    bin_specs=(BinSpec((0.0, 60.0, 120.0)), BinSpec((0.0, 2000.0, 4000.0))),
)


def ctx(t_start=0, t_end=60_000):
    return VehicleContext(
        vehicle_pseudonym="veh-h1",
        owner_id="owner-h",
        t_start_ms=t_start,
        t_end_ms=t_end,
        mileage_start_km=0.0,
        mileage_end_km=1.0,
    )


def engine_readings(n, rate_hz=100.0, t0=0, rpm=800.0):
    step = 1000.0 / rate_hz
    return [
        ProprietaryReading("oem-test", "can_0x0c6", int(rpm / 0.25), int(t0 + i * step))
        for i in range(n)
    ]


def test_linear_map():
    reading = ProprietaryReading("oem-test", "can_0x0c6", 800, 0)
    signal_id, sample = map_reading(reading, TABLE)
    assert signal_id == "engine_speed"
    assert sample.value == 200.0


def test_identity_map_passes_through():
    table = MappingTable("t", {"x": MappingEntry("humidity", 1.0, 0.0)})
    _, sample = map_reading(ProprietaryReading("t", "x", 42, 5, (1.0, 2.0)), table)
    assert sample.value == 42.0
    assert sample.timestamp_ms == 5
    assert sample.position == (1.0, 2.0)


def test_out_of_range_clamped_and_counted():
    from collections import Counter

    counter = Counter()
    # humidity scale 0.5: raw 300 -> 150 %, above the 100 % max
    reading = ProprietaryReading("oem-test", "can_0x310", 300, 0)
    _, sample = map_reading(reading, TABLE, clamp_counter=counter)
    assert sample.value == 100.0
    assert counter["humidity"] == 1


def test_unknown_raw_code_raises():
    with pytest.raises(UnknownRawCodeError):
        map_reading(ProprietaryReading("oem-test", "can_dead", 1, 0), TABLE)


def test_missing_sensor_skips_channel_without_failing():
    h = Harmonizer(TABLE, KEY)
    packages = h.harmonize_window(engine_readings(100), [ENGINE_STD, HUMIDITY_TS], ctx())
    assert [p.meta.channel_id for p in packages] == ["engine_speed_std"]


def test_two_quality_tiers_from_one_signal():
    h = Harmonizer(TABLE, KEY)
    packages = h.harmonize_window(engine_readings(300), [ENGINE_STD, ENGINE_HIGH], ctx())
    by_channel = {p.meta.channel_id: p for p in packages}
    assert set(by_channel) == {"engine_speed_std", "engine_speed_high"}
    assert len(by_channel["engine_speed_std"].payload.values) == 3
    assert len(by_channel["engine_speed_high"].payload.values) == 300


def test_empty_window_emits_nothing():
    h = Harmonizer(TABLE, KEY)
    assert h.harmonize_window([], [ENGINE_STD], ctx()) == []


def test_sequence_numbers_consecutive_across_windows():
    h = Harmonizer(TABLE, KEY)
    seqs = []
    for w in range(3):
        pkgs = h.harmonize_window(
            engine_readings(100, t0=w * 60_000), [ENGINE_STD], ctx(w * 60_000, (w + 1) * 60_000)
        )
        seqs.append(pkgs[0].meta.sequence_no)
    assert seqs == [0, 1, 2]


def test_sequence_resume_after_restart():
    h = Harmonizer(TABLE, KEY)
    h.resume_sequences({("veh-h1", "engine_speed_std"): 4})
    pkgs = h.harmonize_window(engine_readings(10), [ENGINE_STD], ctx())
    assert pkgs[0].meta.sequence_no == 5


def test_deterministic_output_bytes():
    def run():
        h = Harmonizer(TABLE, KEY)
        pkgs = h.harmonize_window(
            engine_readings(100), [ENGINE_STD, SPEED_ENGINE_HIST], ctx()
        )
        return [serialize_package(p) for p in pkgs]

    assert run() == run()


def test_multi_signal_histogram_joins_on_timestamps():
    h = Harmonizer(TABLE, KEY)
    readings = engine_readings(100, rpm=1000.0)
    # speed readings share every second timestamp with engine readings
    readings += [
        ProprietaryReading("oem-test", "can_0x0d0", 5000, t)
        for t in range(0, 1000, 20)
    ]
    packages = h.harmonize_window(readings, [SPEED_ENGINE_HIST], ctx())
    hist = packages[0].payload
    assert hist.total_samples == 50  # only aligned timestamps enter
    report = validate_package(packages[0], REGISTRY)
    assert report.valid


def test_no_fabrication_bound():
    h = Harmonizer(TABLE, KEY)
    readings = engine_readings(123)
    packages = h.harmonize_window(readings, [ENGINE_HIGH], ctx())
    assert len(packages[0].payload.values) <= len(readings)


def test_dropped_unknown_codes_counted():
    h = Harmonizer(TABLE, KEY)
    readings = [ProprietaryReading("oem-test", "can_bogus", 1, t) for t in range(5)]
    assert h.harmonize_window(readings, [ENGINE_STD], ctx()) == []
    assert h.stats.dropped_readings == 5


def test_mapping_table_file_round_trip(tmp_path):
    path = tmp_path / "mapping.tbl"
    path.write_text(
        "# oem        raw_code   signal_id            scale  offset\n"
        "oem-test     can_0x0c6  engine_speed         0.25   0.0    quarter rpm\n"
        "oem-test     can_0x2a4  outside_temperature  0.1    -40.0\n"
        "other-oem    bus_77     vehicle_speed        1.0    0.0\n"
    )
    tables = load_mapping_tables(path)
    assert set(tables) == {"oem-test", "other-oem"}
    assert tables["oem-test"].entries["can_0x0c6"].scale == 0.25
    assert tables["oem-test"].entries["can_0x2a4"].offset == -40.0
    single = MappingTable.from_file(path, "other-oem")
    assert single.entries["bus_77"].signal_id == "vehicle_speed"
    with pytest.raises(ValueError, match="pass oem_id"):
        MappingTable.from_file(path)


def test_mapping_table_rejects_unknown_signal(tmp_path):
    path = tmp_path / "bad.tbl"
    path.write_text("oem x warp_core_temp 1.0 0.0\n")
    with pytest.raises(ValueError, match="warp_core_temp"):
        load_mapping_tables(path)
