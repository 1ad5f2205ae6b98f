"""Fleet telemetry pipeline: harmonized data model, per-owner vaults with
consent control, and a marketplace routing packages to service providers."""

__version__ = "0.1.0"
