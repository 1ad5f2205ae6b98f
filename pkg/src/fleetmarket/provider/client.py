"""Marketplace access for providers: one client API, two transports.

DirectMarketplaceClient wraps an in-process service (tests, notebooks);
HttpMarketplaceClient talks to the REST interface.
"""

from __future__ import annotations

from typing import Any, Protocol

from ..marketplace import AgreementFilter, MarketplaceService
from ..model import DataPackage
from ..model.serialization import package_from_obj


class MarketplaceClient(Protocol):
    def channels(self) -> list[dict]: ...

    def catalog(self, query: dict[str, Any] | None = None) -> list[dict]: ...

    def create_agreement(
        self, provider_id: str, channel_ids: list[str], filter: dict | None, mode: str
    ) -> dict: ...

    def terminate(self, agreement_id: str, actor: str) -> dict: ...

    def pull(self, agreement_id: str) -> tuple[list[DataPackage], list[dict]]: ...

    def deliveries(
        self, agreement_id: str, max_items: int = 100, wait_s: float = 0.0
    ) -> list[DataPackage]: ...


class DirectMarketplaceClient:
    def __init__(self, service: MarketplaceService, provider_id: str):
        self.service = service
        self.provider_id = provider_id

    def channels(self) -> list[dict]:
        return [
            {
                "channel_id": spec.channel_id,
                "channel_type": spec.channel_type,
                "source_signals": list(spec.source_signals),
                "quality_tier": spec.quality_tier,
            }
            for spec in sorted(self.service.channel_specs.values(), key=lambda s: s.channel_id)
        ]

    def catalog(self, query: dict[str, Any] | None = None) -> list[dict]:
        from ..marketplace import parse_catalog_filter

        parsed = parse_catalog_filter(query or {})
        return [e.to_obj() for e in self.service.catalog(parsed)]

    def create_agreement(self, provider_id, channel_ids, filter=None, mode="pull") -> dict:
        agreement = self.service.create_agreement(
            provider_id, channel_ids, AgreementFilter.from_obj(filter), mode
        )
        return agreement.to_obj()

    def terminate(self, agreement_id: str, actor: str = "provider") -> dict:
        return self.service.terminate(agreement_id, actor).to_obj()

    def pull(self, agreement_id: str):
        batch = self.service.pull(self.provider_id, agreement_id)
        return batch.packages, batch.vault_errors

    def deliveries(self, agreement_id: str, max_items: int = 100, wait_s: float = 0.0):
        return self.service.subscription_queue(agreement_id).poll(max_items, wait_s)


class HttpMarketplaceClient:
    def __init__(self, endpoint: str, provider_id: str, client=None):
        import httpx

        self.endpoint = endpoint.rstrip("/")
        self.provider_id = provider_id
        self._client = client if client is not None else httpx.Client(timeout=30.0)

    def close(self) -> None:
        self._client.close()

    @property
    def _auth(self) -> dict[str, str]:
        return {"Authorization": f"Bearer provider:{self.provider_id}"}

    def _get(self, path: str, params: dict | None = None) -> dict:
        response = self._client.get(f"{self.endpoint}{path}", params=params, headers=self._auth)
        response.raise_for_status()
        return response.json()

    def _post(self, path: str, body: dict | None = None) -> dict:
        response = self._client.post(f"{self.endpoint}{path}", json=body, headers=self._auth)
        response.raise_for_status()
        return response.json()

    def channels(self) -> list[dict]:
        return self._get("/channels")["channels"]

    def catalog(self, query: dict[str, Any] | None = None) -> list[dict]:
        return self._get("/catalog", params=query or {})["entries"]

    def create_agreement(self, provider_id, channel_ids, filter=None, mode="pull") -> dict:
        return self._post(
            "/agreements",
            {
                "provider_id": provider_id,
                "channel_ids": list(channel_ids),
                "filter": filter,
                "mode": mode,
            },
        )

    def terminate(self, agreement_id: str, actor: str = "provider") -> dict:
        return self._post(f"/agreements/{agreement_id}/terminate", {"actor": actor})

    def pull(self, agreement_id: str):
        obj = self._post(f"/agreements/{agreement_id}/pull")
        packages = [package_from_obj(p) for p in obj["packages"]]
        return packages, obj["vault_errors"]

    def deliveries(self, agreement_id: str, max_items: int = 100, wait_s: float = 0.0):
        obj = self._get(
            f"/agreements/{agreement_id}/deliveries",
            params={"max_items": max_items, "wait_s": wait_s},
        )
        return [package_from_obj(p) for p in obj["packages"]]

    def producer_keys(self):
        """Producer public keys re-published by the marketplace."""
        from ..model import KeyRegistry, PublicKey

        keys = [
            PublicKey(k["key_id"], k["scheme"], bytes.fromhex(k["public_hex"]))
            for k in self._get("/keys")["keys"]
        ]
        return KeyRegistry(keys)
