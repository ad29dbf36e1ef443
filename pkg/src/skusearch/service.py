"""HTTP facade over the engine.

Handlers are declared `async def` on purpose: the engine's synchronous calls
then run on the event loop thread one at a time, so the per-request
elapsed_ms echoed in bodies reflects actual compute rather than time spent
interleaved with other requests on a thread pool.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import engine as eng
from .catalog import load_catalog

SCHEMA_VERSION = "1"
MAX_SUGGEST_LIMIT = 50


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class EngineHolder:
    """Single mutable cell holding the current EngineState.

    Reindexing builds a fresh state off-thread and swaps the reference;
    in-flight requests keep using whichever state they already grabbed.
    """

    def __init__(
        self,
        state: eng.EngineState,
        catalog_path: str | Path | None = None,
        catalog_format: str = "csv",
        index_dir: str | Path | None = None,
    ):
        self._state = state
        self._lock = threading.Lock()
        self._building = False
        self.catalog_path = Path(catalog_path) if catalog_path else None
        self.catalog_format = catalog_format
        self.index_dir = Path(index_dir) if index_dir else None
        self.last_error: str | None = None

    @property
    def state(self) -> eng.EngineState:
        return self._state

    @property
    def building(self) -> bool:
        return self._building

    def start_reindex(self) -> bool:
        with self._lock:
            if self._building:
                return False
            self._building = True
        threading.Thread(target=self._reindex, name="reindex", daemon=True).start()
        return True

    def _reindex(self) -> None:
        try:
            old = self._state
            if self.catalog_path is not None:
                catalog = load_catalog(self.catalog_path, format=self.catalog_format)
            else:
                catalog = old.catalog
            new_state = eng.build_indexes(
                catalog, old.config, index_dir=self.index_dir, abbrev=old.abbrev
            )
            self._state = new_state
            self.last_error = None
        except Exception as exc:
            self.last_error = str(exc)
        finally:
            self._building = False


def _record_dict(record) -> dict:
    return {
        "sku_id": record.sku_id,
        "part_number": record.part_number,
        "item_name": record.item_name,
        "friendly_name": record.friendly_name,
        "description": record.description,
    }


def create_app(holder: EngineHolder, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="skusearch", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins if cors_origins is not None else ["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def schema_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Schema-Version"] = SCHEMA_VERSION
        return response

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "bad_request", "message": str(exc.errors()[:1])}
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = "bad_request" if exc.status_code < 500 else "internal"
        return JSONResponse(
            status_code=exc.status_code, content={"code": code, "message": str(exc.detail)}
        )

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500, content={"code": "internal", "message": type(exc).__name__}
        )

    def ready_state() -> eng.EngineState:
        if holder.building:
            raise ApiError(503, "not_ready", "index rebuild in progress")
        return holder.state

    @app.get("/suggest")
    async def suggest_endpoint(q: str = "", limit: int | None = None):
        state = ready_state()
        if not q.strip():
            raise ApiError(400, "bad_request", "q must be non-empty")
        if limit is not None and limit < 1:
            raise ApiError(400, "bad_request", "limit must be >= 1")
        cap = min(limit if limit is not None else state.config.suggest_limit, MAX_SUGGEST_LIMIT)
        return eng.suggest(state, q, limit=cap).to_dict()

    @app.get("/search")
    async def search_endpoint(q: str = ""):
        state = ready_state()
        if not q.strip():
            raise ApiError(400, "bad_request", "q must be non-empty")
        return eng.search(state, q).to_dict()

    @app.get("/sku/{sku_id}")
    async def sku_endpoint(sku_id: int):
        state = ready_state()
        record = state.catalog.get(sku_id)
        if record is None:
            raise ApiError(404, "bad_request", f"no sku with id {sku_id}")
        return _record_dict(record)

    @app.post("/admin/reindex", status_code=202)
    async def reindex_endpoint():
        if not holder.start_reindex():
            raise ApiError(409, "bad_request", "reindex already in progress")
        return {"status": "building"}

    @app.get("/healthz")
    async def healthz_endpoint():
        status = "building" if holder.building else "ready"
        return {
            "status": status,
            "catalog_size": len(holder.state.catalog),
            "index_fingerprint": holder.state.fingerprint,
        }

    return app


_SCORES = {"type": "object", "additionalProperties": {"type": "number"}}

SEARCH_RESULT_SCHEMA = {
    "type": "object",
    "required": ["sku_id", "part_number", "item_name", "scores"],
    "properties": {
        "sku_id": {"type": "integer"},
        "part_number": {"type": "string"},
        "item_name": {"type": "string"},
        "friendly_name": {"type": ["string", "null"]},
        "description": {"type": ["string", "null"]},
        "scores": _SCORES,
        "nlcs_score": {"type": ["number", "null"]},
        "matched_field": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

SEARCH_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["query", "branch", "results", "corrected_query", "degraded", "elapsed_ms"],
    "properties": {
        "query": {"type": "string"},
        "branch": {"enum": ["part_number", "hybrid"]},
        "results": {"type": "array", "items": SEARCH_RESULT_SCHEMA},
        "corrected_query": {"type": ["string", "null"]},
        "degraded": {"type": "boolean"},
        "elapsed_ms": {"type": "number"},
    },
    "additionalProperties": False,
}

SUGGEST_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["suggestions", "elapsed_ms"],
    "properties": {
        "suggestions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["key", "sku_id", "field_kind"],
                "properties": {
                    "key": {"type": "string"},
                    "sku_id": {"type": "integer"},
                    "field_kind": {"enum": ["part_number", "item_name", "friendly_name"]},
                },
                "additionalProperties": False,
            },
        },
        "elapsed_ms": {"type": "number"},
    },
    "additionalProperties": False,
}

ERROR_SCHEMA = {
    "type": "object",
    "required": ["code", "message"],
    "properties": {
        "code": {"enum": ["bad_request", "not_ready", "internal", "upstream_degraded"]},
        "message": {"type": "string"},
    },
    "additionalProperties": False,
}

HEALTH_SCHEMA = {
    "type": "object",
    "required": ["status", "catalog_size", "index_fingerprint"],
    "properties": {
        "status": {"enum": ["ready", "building"]},
        "catalog_size": {"type": "integer"},
        "index_fingerprint": {"type": "string"},
    },
    "additionalProperties": False,
}
