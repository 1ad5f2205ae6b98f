import json

from click.testing import CliRunner

from fleetmarket.model import canonical, serialize_package
from fleetmarket.provider import generate_test_packages
from fleetmarket.provider.cli import main as provider_main
from fleetmarket.simulator.cli import main as sim_main


def write_config(path, **overrides):
    config = {
        "n_vehicles": 2,
        "duration_s": 120,
        "seed": 5,
        "region": {"lat_min": 50.0, "lat_max": 50.3, "lon_min": 8.0, "lon_max": 8.3},
        "channels": [
            {
                "channel_id": "temp_std",
                "channel_type": "time_series",
                "source_signals": ["outside_temperature"],
                "reporting_interval_s": 60.0,
                "tsmc_rate_hz": 1.0,
                "tsmc_method": "average",
            },
            {
                "channel_id": "temp_geo",
                "channel_type": "geo_histogram",
                "source_signals": ["outside_temperature"],
                "reporting_interval_s": 60.0,
                "bin_specs": [{"edges": [float(v) for v in range(-40, 61)]}],
                "geo_resolution_deg": 0.1,
            },
        ],
        "default_fitment": ["outside_temperature"],
    }
    config.update(overrides)
    path.write_text(json.dumps(config))
    return config


def test_fleet_sim_run_in_process(tmp_path):
    config_path = tmp_path / "fleet.json"
    write_config(config_path)
    report_path = tmp_path / "report.json"
    runner = CliRunner()
    result = runner.invoke(
        sim_main,
        [
            "run",
            "--config", str(config_path),
            "--in-process",
            "--report", str(report_path),
            "--vault-root", str(tmp_path / "vaults"),
        ],
    )
    assert result.exit_code == 0, result.output
    report = canonical.decode(report_path.read_bytes().strip())
    assert report["total_packages"] == 8  # 2 vehicles x 2 windows x 2 channels
    assert report["completed"] is True
    assert report["corpus_digest"]


def test_fleet_sim_seed_override_changes_corpus(tmp_path):
    config_path = tmp_path / "fleet.json"
    write_config(config_path)
    runner = CliRunner()
    digests = []
    for seed in (5, 6):
        result = runner.invoke(
            sim_main,
            ["run", "--config", str(config_path), "--in-process", "--seed", str(seed),
             "--vault-root", str(tmp_path / f"v{seed}")],
        )
        assert result.exit_code == 0, result.output
        digests.append(canonical.decode(result.output.strip().encode())["corpus_digest"])
    assert digests[0] != digests[1]


def test_provider_cli_analytics_from_package_dir(tmp_path):
    packages_dir = tmp_path / "pkgs"
    packages_dir.mkdir()
    for pkg in generate_test_packages(seed=9, n_vehicles=2, windows=2):
        (packages_dir / f"{pkg.meta.package_id}.pkg").write_bytes(serialize_package(pkg))
    out = tmp_path / "weather.txt"
    dump = tmp_path / "weather.json"
    runner = CliRunner()
    result = runner.invoke(
        provider_main,
        ["weather", "--packages", str(packages_dir), "--channel-id", "temp_geo",
         "--out", str(out), "--dump", str(dump)],
    )
    assert result.exit_code == 0, result.output
    assert "cells written" in result.output
    rows = canonical.decode(dump.read_bytes())
    assert rows and all("mean_temp_degc" in row for row in rows)
    header = out.read_text().splitlines()[0]
    assert "mean_temp_degc" in header


def test_provider_cli_reports_missing_channel(tmp_path):
    packages_dir = tmp_path / "pkgs"
    packages_dir.mkdir()
    for pkg in generate_test_packages(seed=9, n_vehicles=1, windows=1):
        (packages_dir / f"{pkg.meta.package_id}.pkg").write_bytes(serialize_package(pkg))
    runner = CliRunner()
    result = runner.invoke(
        provider_main,
        ["weather", "--packages", str(packages_dir), "--channel-id", "nope",
         "--out", str(tmp_path / "x.txt")],
    )
    assert result.exit_code != 0
    assert "no packages for channel" in result.output
