"""provider-cli: pull or subscribe to fleet data, run the reference analytics.

Pulled packages land as canonical .pkg files in a directory; the
analytics commands read such a directory, accumulate, and write the
resulting grid as tabular text (plus an optional machine-readable dump).
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ..model import canonical, deserialize_package, serialize_package
from .accumulator import FleetAccumulator
from .analytics import road_quality, weather_grid
from .client import HttpMarketplaceClient
from .testdata import fixture_key_registry


def _load_packages(directory: Path):
    for path in sorted(directory.glob("*.pkg")):
        yield deserialize_package(path.read_bytes())


def _key_registry(endpoint: str | None):
    if endpoint is None:
        return fixture_key_registry()
    client = HttpMarketplaceClient(endpoint, "keyfetch")
    try:
        return client.producer_keys()
    finally:
        client.close()


@click.group()
def main() -> None:
    """Provider-side tools for the fleet data marketplace."""


@main.command()
@click.option("--endpoint", required=True, help="Marketplace base URL")
@click.option("--provider", required=True, help="Provider id (bearer identity)")
@click.option("--agreement-id", required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Package directory")
def pull(endpoint: str, provider: str, agreement_id: str, out: Path) -> None:
    """Fetch one fleet-wide batch and store the packages."""
    client = HttpMarketplaceClient(endpoint, provider)
    try:
        packages, errors = client.pull(agreement_id)
    finally:
        client.close()
    out.mkdir(parents=True, exist_ok=True)
    for pkg in packages:
        (out / f"{pkg.meta.package_id}.pkg").write_bytes(serialize_package(pkg))
    click.echo(f"pulled {len(packages)} packages into {out}")
    for error in errors:
        click.echo(f"vault error: {error}", err=True)


@main.command()
@click.option("--endpoint", required=True)
@click.option("--provider", required=True)
@click.option("--agreement-id", required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--max-packages", default=100, show_default=True)
@click.option("--wait-s", default=5.0, show_default=True, help="Long-poll wait per request")
@click.option("--rounds", default=1, show_default=True, help="Number of long-poll rounds")
def subscribe(endpoint, provider, agreement_id, out: Path, max_packages, wait_s, rounds) -> None:
    """Consume push deliveries from the subscription stream."""
    client = HttpMarketplaceClient(endpoint, provider)
    out.mkdir(parents=True, exist_ok=True)
    received = 0
    try:
        for _ in range(rounds):
            for pkg in client.deliveries(agreement_id, max_items=max_packages, wait_s=wait_s):
                (out / f"{pkg.meta.package_id}.pkg").write_bytes(serialize_package(pkg))
                received += 1
                click.echo(f"delivered {pkg.meta.package_id} ({pkg.meta.channel_id})")
    finally:
        client.close()
    click.echo(f"received {received} packages")


def _accumulate_dir(packages_dir: Path, channel_id: str, signal: str, endpoint: str | None):
    from ..model import BinSpec, ChannelSpec, GeoHistogramData

    packages = list(_load_packages(packages_dir))
    if not packages:
        raise click.ClickException(f"no .pkg files in {packages_dir}")
    sample = next((p for p in packages if p.meta.channel_id == channel_id), None)
    if sample is None:
        raise click.ClickException(f"no packages for channel {channel_id!r}")
    payload = sample.payload
    if not isinstance(payload, GeoHistogramData):
        raise click.ClickException(f"channel {channel_id!r} does not carry geo histograms")
    bin_specs = payload.bin_specs or (BinSpec((0.0, 1.0)),)
    spec = ChannelSpec(
        channel_id=channel_id,
        channel_type="geo_histogram",
        source_signals=(signal,),
        reporting_interval_s=60.0,
        bin_specs=bin_specs,
        geo_resolution_deg=payload.geo_resolution_deg,
    )
    acc = FleetAccumulator({channel_id: spec}, _key_registry(endpoint))
    accepted = 0
    for pkg in packages:
        if pkg.meta.channel_id != channel_id:
            continue
        if acc.accumulate(pkg).accepted:
            accepted += 1
    if accepted == 0:
        reasons = "; ".join(sorted({reason for _, reason in acc.rejected})) or "no matching packages"
        raise click.ClickException(f"no packages accepted: {reasons}")
    return acc


def _write_grid(rows: list[dict], out: Path, dump: Path | None, value_key: str) -> None:
    lines = [f"{'row':>6} {'col':>6} {'lat':>10} {'lon':>10} {value_key:>16} {'samples':>8}"]
    for row in rows:
        lines.append(
            f"{row['row']:>6} {row['col']:>6} {row['lat_center']:>10.4f} "
            f"{row['lon_center']:>10.4f} {row[value_key]:>16.4f} {row['sample_count']:>8}"
        )
    out.write_text("\n".join(lines) + "\n")
    if dump is not None:
        dump.write_bytes(canonical.encode(rows))


@main.command()
@click.option("--packages", "packages_dir", type=click.Path(path_type=Path), required=True)
@click.option("--channel-id", default="temp_geo", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--dump", type=click.Path(path_type=Path), default=None, help="Plot-friendly grid dump")
@click.option("--endpoint", default=None, help="Marketplace URL for producer key lookup")
def weather(packages_dir: Path, channel_id: str, out: Path, dump: Path | None, endpoint) -> None:
    """Build the per-cell temperature grid from accumulated packages."""
    acc = _accumulate_dir(packages_dir, channel_id, "outside_temperature", endpoint)
    grid = weather_grid(acc, channel_id)
    _write_grid(grid.to_rows(), out, dump, "mean_temp_degc")
    click.echo(f"{len(grid.cells)} cells written to {out}")


@main.command("roadquality")
@click.option("--packages", "packages_dir", type=click.Path(path_type=Path), required=True)
@click.option("--channel-id", default="vert_accel_geo", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--dump", type=click.Path(path_type=Path), default=None)
@click.option("--endpoint", default=None, help="Marketplace URL for producer key lookup")
def roadquality(packages_dir: Path, channel_id: str, out: Path, dump: Path | None, endpoint) -> None:
    """Rank grid cells by road roughness from accumulated packages."""
    acc = _accumulate_dir(packages_dir, channel_id, "vertical_acceleration", endpoint)
    rq = road_quality(acc, channel_id)
    _write_grid(rq.to_rows(), out, dump, "roughness_score")
    click.echo(f"{len(rq.cells)} cells written to {out}")


if __name__ == "__main__":
    sys.exit(main())
