"""HTTP resource interface over a vault store.

Package bodies are canonical package bytes; JSON bodies use plain
objects. Authorization is a bearer-token stub: owners authenticate as
``owner:<owner_id>``, the marketplace as the store's marketplace token.
"""

from __future__ import annotations

from fastapi import FastAPI, Header, HTTPException, Request, Response
from pydantic import BaseModel

from ..model import ParseError, SchemaError, deserialize_package, serialize_package
from ..model.serialization import package_to_obj
from .store import (
    AuthorizationError,
    SequenceConflictError,
    ValidationRejected,
    VaultStore,
)


class ConsentBody(BaseModel):
    channel_id: str
    granted: bool
    updated_at_ms: int


def _token(authorization: str | None) -> str:
    if authorization is None:
        return ""
    prefix = "Bearer "
    return authorization[len(prefix):] if authorization.startswith(prefix) else authorization


def create_vault_app(store: VaultStore) -> FastAPI:
    app = FastAPI(title="vault-store", version="0.1.0")

    @app.post("/owners/{owner_id}/packages")
    async def store_package(owner_id: str, request: Request):
        body = await request.body()
        try:
            pkg = deserialize_package(body)
        except ParseError as exc:
            raise HTTPException(400, detail={"error": "parse", "message": str(exc), "offset": exc.offset})
        except SchemaError as exc:
            raise HTTPException(400, detail={"error": "schema", "message": str(exc), "path": exc.path})
        try:
            result = store.store_package(owner_id, pkg)
        except ValidationRejected as exc:
            raise HTTPException(400, detail={"error": "validation", "report": exc.report.to_obj()})
        except AuthorizationError as exc:
            raise HTTPException(403, detail=str(exc))
        except SequenceConflictError as exc:
            raise HTTPException(409, detail=str(exc))
        return {"status": result.status, "package_id": result.package_id}

    @app.get("/owners/{owner_id}/channels/{channel_id}/packages")
    def fetch_packages(
        owner_id: str,
        channel_id: str,
        since: int = -1,
        authorization: str | None = Header(default=None),
    ):
        try:
            packages = store.fetch_packages(owner_id, channel_id, since, _token(authorization))
        except AuthorizationError as exc:
            raise HTTPException(403, detail=str(exc))
        return {"packages": [package_to_obj(p) for p in packages]}

    @app.get("/owners/{owner_id}/packages/{package_id}")
    def get_package(
        owner_id: str, package_id: str, authorization: str | None = Header(default=None)
    ):
        try:
            pkg = store.get_package(owner_id, package_id, _token(authorization))
        except AuthorizationError as exc:
            raise HTTPException(403, detail=str(exc))
        except KeyError:
            raise HTTPException(404, detail=f"no package {package_id!r}")
        return Response(content=serialize_package(pkg), media_type="application/json")

    @app.get("/owners/{owner_id}/meta")
    def list_meta(owner_id: str, authorization: str | None = Header(default=None)):
        try:
            metas = store.list_meta(owner_id, _token(authorization))
        except AuthorizationError as exc:
            raise HTTPException(403, detail=str(exc))
        return {"metas": metas}

    @app.put("/owners/{owner_id}/consent")
    @app.post("/owners/{owner_id}/consent")
    def set_consent(
        owner_id: str, body: ConsentBody, authorization: str | None = Header(default=None)
    ):
        # the fleet pipeline (acting for the owner) and the owner UI both land here
        token = _token(authorization)
        if token and token != f"owner:{owner_id}":
            raise HTTPException(403, detail="only the owner may change consent")
        record = store.set_consent(owner_id, body.channel_id, body.granted, body.updated_at_ms)
        return {
            "owner_id": record.owner_id,
            "channel_id": record.channel_id,
            "granted": record.granted,
            "updated_at_ms": record.updated_at_ms,
        }

    @app.get("/owners/{owner_id}/consent")
    def consent_records(owner_id: str):
        return {
            "records": [
                {
                    "owner_id": r.owner_id,
                    "channel_id": r.channel_id,
                    "granted": r.granted,
                    "updated_at_ms": r.updated_at_ms,
                }
                for r in store.consent_records(owner_id)
            ]
        }

    @app.get("/owners/{owner_id}/channels/{channel_id}/highest-sequence")
    def highest_sequence(owner_id: str, channel_id: str, vehicle: str):
        return {"sequence": store.highest_sequence(owner_id, vehicle, channel_id)}

    return app
