"""REST interface of the marketplace.

The machine-readable interface description is the OpenAPI document the
app serves at /openapi.json (a copy ships in the repository docs).
Providers authenticate with bearer-token stubs of the form
``provider:<provider_id>``; payload-carrying endpoints are only reachable
under an agreement owned by that provider.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Header, HTTPException
from pydantic import BaseModel

from ..model import SchemaError
from ..model.serialization import meta_from_obj, package_to_obj
from .agreements import AgreementFilter, InactiveAgreementError, UnknownChannelError
from .catalog import parse_catalog_filter
from .service import MarketplaceService


class IngestBody(BaseModel):
    owner_id: str
    meta: dict[str, Any]


class ConsentBody(BaseModel):
    owner_id: str
    channel_id: str
    granted: bool
    at_ms: int


class AgreementBody(BaseModel):
    provider_id: str
    channel_ids: list[str]
    filter: dict[str, Any] | None = None
    mode: str = "pull"


class TerminateBody(BaseModel):
    actor: str


def _token(authorization: str | None) -> str:
    if authorization is None:
        return ""
    prefix = "Bearer "
    return authorization[len(prefix):] if authorization.startswith(prefix) else authorization


def _require_provider(authorization: str | None, provider_id: str) -> None:
    if _token(authorization) != f"provider:{provider_id}":
        raise HTTPException(403, detail="token does not match the agreement's provider")


def create_marketplace_app(service: MarketplaceService) -> FastAPI:
    app = FastAPI(title="marketplace-service", version="0.1.0")

    @app.get("/channels")
    def channels():
        out = []
        for spec in sorted(service.channel_specs.values(), key=lambda s: s.channel_id):
            out.append(
                {
                    "channel_id": spec.channel_id,
                    "channel_type": spec.channel_type,
                    "source_signals": list(spec.source_signals),
                    "quality_tier": spec.quality_tier,
                    "reporting_interval_s": spec.reporting_interval_s,
                    "geo_resolution_deg": spec.geo_resolution_deg,
                }
            )
        return {"channels": out}

    @app.get("/catalog")
    def catalog(
        channel_id: str | None = None,
        lat_min: float | None = None,
        lat_max: float | None = None,
        lon_min: float | None = None,
        lon_max: float | None = None,
        t_start_min_ms: int | None = None,
        t_start_max_ms: int | None = None,
    ):
        raw = {
            "channel_id": channel_id,
            "lat_min": lat_min,
            "lat_max": lat_max,
            "lon_min": lon_min,
            "lon_max": lon_max,
            "t_start_min_ms": t_start_min_ms,
            "t_start_max_ms": t_start_max_ms,
        }
        raw = {k: v for k, v in raw.items() if v is not None}
        try:
            query = parse_catalog_filter(raw)
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc))
        return {"entries": [e.to_obj() for e in service.catalog(query)], "now_ms": service.now_ms}

    @app.post("/ingest")
    def ingest(body: IngestBody):
        try:
            meta = meta_from_obj(body.meta)
        except SchemaError as exc:
            raise HTTPException(400, detail={"error": "schema", "message": str(exc), "path": exc.path})
        ack = service.ingest_meta(meta, body.owner_id)
        return {"indexed": ack.indexed, "reason": ack.reason}

    @app.post("/consent")
    def consent(body: ConsentBody):
        service.notify_consent(body.owner_id, body.channel_id, body.granted, body.at_ms)
        return {"ok": True}

    @app.post("/agreements")
    def create_agreement(body: AgreementBody, authorization: str | None = Header(default=None)):
        _require_provider(authorization, body.provider_id)
        if body.mode not in ("pull", "push"):
            raise HTTPException(400, detail=f"mode must be pull or push, got {body.mode!r}")
        try:
            agreement = service.create_agreement(
                provider_id=body.provider_id,
                channel_ids=body.channel_ids,
                filter=AgreementFilter.from_obj(body.filter),
                mode=body.mode,  # type: ignore[arg-type]
            )
        except UnknownChannelError as exc:
            raise HTTPException(404, detail={"error": "unknown_channels", "channels": list(exc.unknown)})
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc))
        return agreement.to_obj()

    @app.get("/agreements")
    def list_agreements(provider_id: str | None = None):
        return {"agreements": [a.to_obj() for a in service.list_agreements(provider_id)]}

    @app.get("/agreements/{agreement_id}")
    def get_agreement(agreement_id: str):
        try:
            return service.get_agreement(agreement_id).to_obj()
        except KeyError:
            raise HTTPException(404, detail=f"no agreement {agreement_id!r}")

    @app.post("/agreements/{agreement_id}/terminate")
    def terminate(agreement_id: str, body: TerminateBody):
        try:
            return service.terminate(agreement_id, body.actor).to_obj()
        except KeyError:
            raise HTTPException(404, detail=f"no agreement {agreement_id!r}")
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc))

    @app.post("/agreements/{agreement_id}/pull")
    def pull(agreement_id: str, authorization: str | None = Header(default=None)):
        try:
            agreement = service.get_agreement(agreement_id)
        except KeyError:
            raise HTTPException(404, detail=f"no agreement {agreement_id!r}")
        _require_provider(authorization, agreement.provider_id)
        try:
            batch = service.pull(agreement.provider_id, agreement_id)
        except InactiveAgreementError as exc:
            raise HTTPException(409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(400, detail=str(exc))
        return batch.to_obj()

    @app.get("/agreements/{agreement_id}/deliveries")
    def deliveries(
        agreement_id: str,
        max_items: int = 100,
        wait_s: float = 0.0,
        authorization: str | None = Header(default=None),
    ):
        try:
            agreement = service.get_agreement(agreement_id)
        except KeyError:
            raise HTTPException(404, detail=f"no agreement {agreement_id!r}")
        _require_provider(authorization, agreement.provider_id)
        try:
            queue = service.subscription_queue(agreement_id)
        except KeyError:
            raise HTTPException(409, detail="agreement has no subscription stream")
        packages = queue.poll(max_items=max_items, timeout_s=min(wait_s, 25.0))
        return {"packages": [package_to_obj(p) for p in packages]}

    @app.get("/keys")
    def keys():
        registry = service.key_registry
        if registry is None:
            return {"keys": []}
        return {
            "keys": [
                {"key_id": k.key_id, "scheme": k.scheme, "public_hex": k.data.hex()}
                for k in registry.public_keys()
            ]
        }

    @app.get("/dead-letters")
    def dead_letters():
        return {"dead_letters": [d.to_obj() for d in service.dead_letters()]}

    @app.get("/delivery-records")
    def delivery_records():
        return {"records": [r.to_obj() for r in service.delivery_records()]}

    return app
