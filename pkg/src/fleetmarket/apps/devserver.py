"""Single-process deployment: vault and marketplace REST side by side.

The vault app mounts under /vault, the marketplace under /market; the
two services are wired directly in process (store notifications reach
the marketplace without a network hop). Intended for development, the
web UI, and HTTP-mode fleet runs.

    python3 -m fleetmarket.apps.devserver --port 8800 --seed-demo
"""

from __future__ import annotations

import threading
import time

import click
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ..marketplace.rest import create_marketplace_app
from ..model import BinSpec, ChannelSpec
from ..simulator import (
    ConsentChange,
    FleetConfig,
    GroundTruthFields,
    InProcessStack,
    Region,
    RoughnessField,
    RoughnessRegion,
    TemperatureField,
    run_fleet,
)
from ..vault.rest import create_vault_app

DEMO_REGION = Region(lat_min=50.0, lat_max=50.4, lon_min=8.0, lon_max=8.4)


def demo_config(seed: int = 7, n_vehicles: int = 5, duration_s: int = 300) -> FleetConfig:
    return FleetConfig(
        n_vehicles=n_vehicles,
        duration_s=duration_s,
        seed=seed,
        region=DEMO_REGION,
        channels=(
            ChannelSpec(
                channel_id="speed_ts_std",
                channel_type="time_series",
                source_signals=("vehicle_speed",),
                reporting_interval_s=60.0,
                tsmc_rate_hz=1.0,
                tsmc_method="keep-first",
            ),
            ChannelSpec(
                channel_id="temp_geo",
                channel_type="geo_histogram",
                source_signals=("outside_temperature",),
                reporting_interval_s=60.0,
                bin_specs=(BinSpec(tuple(float(v) for v in range(-40, 61))),),
                geo_resolution_deg=0.1,
            ),
            ChannelSpec(
                channel_id="vert_accel_geo",
                channel_type="geo_histogram",
                source_signals=("vertical_acceleration",),
                reporting_interval_s=60.0,
                bin_specs=(BinSpec(tuple(v * 0.25 for v in range(-20, 21))),),
                geo_resolution_deg=0.05,
            ),
        ),
        default_fitment=("vehicle_speed", "outside_temperature", "vertical_acceleration"),
        fields=GroundTruthFields(
            temperature=TemperatureField(t0_degc=12.0, lat0=50.0, lon0=8.0),
            roughness=RoughnessField(
                0.2, (RoughnessRegion(50.0, 50.4, 8.2, 8.4, sigma_mps2=1.0),)
            ),
        ),
    )


class LiveFeeder:
    """Simulates one reporting window per tick so push feeds keep flowing."""

    def __init__(self, stack: InProcessStack, config: FleetConfig, tick_s: float = 2.0):
        self.stack = stack
        self.config = config
        self.tick_s = tick_s
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True, name="live-feeder")

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()

    def _run(self) -> None:
        from ..harmonizer import Harmonizer
        from ..simulator.readings import SIM_MAPPING, generate_window_readings
        from ..simulator.runner import _window_ctx, fleet_signing_key, owner_id_for
        from ..simulator.trajectory import generate_trajectory

        config = self.config
        key = fleet_signing_key(config.seed)
        interval = int(config.reporting_interval_s)
        horizon_s = 24 * 3600
        trajectories = [
            generate_trajectory(config.seed, v, config.region, horizon_s)
            for v in range(config.n_vehicles)
        ]
        harmonizers = [Harmonizer(SIM_MAPPING, key) for _ in range(config.n_vehicles)]
        for v in range(config.n_vehicles):
            existing = {}
            pseudonym = _pseudonym(config, v)
            for spec in config.channels:
                top = self.stack.store.highest_sequence(
                    owner_id_for(v), pseudonym, spec.channel_id
                )
                if top is not None:
                    existing[(pseudonym, spec.channel_id)] = top
            harmonizers[v].resume_sequences(existing)
        window = _next_window(self.stack, config)
        while not self._stop.wait(self.tick_s):
            if (window + 1) * interval > horizon_s:
                return
            for v in range(config.n_vehicles):
                readings = generate_window_readings(
                    trajectories[v],
                    config.fitment_for(v),
                    config.fields,
                    config.seed,
                    window * interval,
                    (window + 1) * interval,
                )
                ctx = _window_ctx(config, trajectories[v], v, window)
                for pkg in harmonizers[v].harmonize_window(readings, config.channels, ctx):
                    self.stack.store.store_package(owner_id_for(v), pkg)
            window += 1


def _pseudonym(config: FleetConfig, v: int) -> str:
    from ..simulator.runner import pseudonym_for

    return pseudonym_for(config.seed, v)


def _next_window(stack: InProcessStack, config: FleetConfig) -> int:
    interval = int(config.reporting_interval_s)
    top = 0
    for spec in config.channels:
        for v in range(config.n_vehicles):
            from ..simulator.runner import owner_id_for

            seq = stack.store.highest_sequence(
                owner_id_for(v), _pseudonym(config, v), spec.channel_id
            )
            if seq is not None:
                top = max(top, seq + 1)
    return top


def create_dev_app(stack: InProcessStack, cors: bool = True) -> FastAPI:
    app = FastAPI(title="fleetmarket-dev", version="0.1.0")
    vault_app = create_vault_app(stack.store)
    market_app = create_marketplace_app(stack.service)
    if cors:
        for sub in (app, vault_app, market_app):
            sub.add_middleware(
                CORSMiddleware,
                allow_origins=["*"],
                allow_methods=["*"],
                allow_headers=["*"],
            )
    app.mount("/vault", vault_app)
    app.mount("/market", market_app)

    @app.get("/health")
    def health():
        return {"ok": True}

    return app


@click.command()
@click.option("--port", default=8800, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--vault-root", default=None, help="Vault directory (default: temp dir)")
@click.option("--seed-demo", is_flag=True, help="Run a small fleet first to populate the stores")
@click.option("--live", is_flag=True, help="Keep simulating one window every --tick-s seconds")
@click.option("--tick-s", default=2.0, show_default=True)
@click.option("--seed", default=7, show_default=True)
def main(port: int, host: str, vault_root, seed_demo: bool, live: bool, tick_s: float, seed: int):
    import uvicorn

    config = demo_config(seed=seed)
    stack = InProcessStack.build(config, vault_root)
    if seed_demo:
        report = run_fleet(config, stack=stack)
        stack.service.drain()
        click.echo(f"seeded {report.total_packages} packages across {report.n_vehicles} vehicles")
    feeder = None
    if live:
        feeder = LiveFeeder(stack, config, tick_s=tick_s)
        feeder.start()
        click.echo(f"live feeder ticking every {tick_s}s")
    app = create_dev_app(stack)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        if feeder is not None:
            feeder.stop()
        stack.close()


if __name__ == "__main__":
    main()
