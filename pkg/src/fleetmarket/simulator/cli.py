"""fleet-sim: run a synthetic fleet through the pipeline.

    fleet-sim run --config fleet.json [--in-process] [--seed N] [--report out.json]

The run report is written in the same canonical notation as packages,
so downstream tooling can parse it byte-exactly.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .config import load_config
from .runner import InProcessStack, run_fleet


@click.group()
def main() -> None:
    """Synthetic fleet simulator."""


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), required=True)
@click.option("--in-process", is_flag=True, help="Run vault and marketplace inside this process")
@click.option("--seed", type=int, default=None, help="Override the config seed")
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None)
@click.option("--vault-root", type=click.Path(path_type=Path), default=None,
              help="Vault directory for in-process runs (default: temp dir)")
def run(config_path: Path, in_process: bool, seed: int | None, report_path: Path | None,
        vault_root: Path | None) -> None:
    """Simulate the fleet and store every package."""
    config = load_config(config_path)
    if seed is not None:
        config = replace(config, seed=seed)
    if in_process:
        stack = InProcessStack.build(config, vault_root)
        try:
            report = run_fleet(config, stack=stack)
            stack.service.drain()
        finally:
            stack.close()
    else:
        if config.vault_endpoint is None:
            raise click.ClickException("config.vault_endpoint is required without --in-process")
        report = run_fleet(config, in_process=False)
    data = report.to_bytes()
    if report_path is not None:
        report_path.write_bytes(data + b"\n")
    click.echo(data.decode("utf-8"))
    if not report.completed:
        raise SystemExit(1)


if __name__ == "__main__":
    sys.exit(main())
