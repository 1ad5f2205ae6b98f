"""Fleet runs over the REST surface (in-process test client, no sockets)."""

import pytest
from fastapi.testclient import TestClient

from fleetmarket.apps.devserver import create_dev_app, demo_config
from fleetmarket.provider.client import HttpMarketplaceClient
from fleetmarket.simulator import InProcessStack, run_fleet
from fleetmarket.simulator.runner import HttpVaultSink


@pytest.fixture
def dev_stack(tmp_path):
    config = demo_config(seed=23, n_vehicles=2, duration_s=120)
    stack = InProcessStack.build(config, tmp_path / "vaults")
    app = create_dev_app(stack)
    yield config, stack, TestClient(app)
    stack.close()


def test_run_fleet_through_vault_rest(dev_stack):
    config, stack, http = dev_stack
    sink = HttpVaultSink("http://testserver/vault", base_delay_s=0.01, client=http)
    report = run_fleet(config, sink=sink)
    assert report.completed
    assert report.total_packages == 2 * 2 * 3
    stack.service.drain()
    entries = stack.service.catalog()
    assert sum(e.package_count for e in entries) == report.total_packages


def test_http_client_pull_and_push(dev_stack):
    config, stack, http = dev_stack
    market = HttpMarketplaceClient("http://testserver/market", "prov-http", client=http)
    push_ag = market.create_agreement("prov-http", ["temp_geo"], mode="push")
    pull_ag = market.create_agreement("prov-http", ["temp_geo"], mode="pull")
    sink = HttpVaultSink("http://testserver/vault", base_delay_s=0.01, client=http)
    run_fleet(config, sink=sink)
    stack.service.drain()
    pulled, errors = market.pull(pull_ag["agreement_id"])
    assert errors == []
    pushed = market.deliveries(push_ag["agreement_id"], max_items=100)
    assert len(pulled) == 4
    assert {p.meta.package_id for p in pulled} == {p.meta.package_id for p in pushed}
    keys = market.producer_keys()
    assert keys.get("simfleet") is not None


def test_unreachable_vault_fails_run_with_partial_report(dev_stack):
    config, _, _ = dev_stack
    sink = HttpVaultSink("http://127.0.0.1:1/vault", max_attempts=2, base_delay_s=0.01)
    try:
        report = run_fleet(config, sink=sink)
    finally:
        sink.close()
    assert not report.completed
    assert report.store_errors and "unreachable" in report.store_errors[0]["error"]
