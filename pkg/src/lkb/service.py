"""HTTP JSON API over the corpus store.

Endpoints (all JSON over HTTP/1.1):

    POST /v1/documents      ingest {source, format, content}
    POST /v1/query          retrieval only, scores included
    POST /v1/ask            full pipeline including the LLM
    GET  /v1/health         liveness and corpus counts
    GET  /v1/index/stats    partition layout of the active index
    POST /v1/index/rebuild  retrain and atomically swap the index

Errors are always {"error": {"code": ..., "message": ...}}.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    DocumentDecodeError,
    EmbedderTransportError,
    EmptyDocumentError,
    EmptyIndexError,
    LkbError,
    LlmTransportError,
    RebuildInProgressError,
    StoreCorruptionError,
)
from .store import CorpusStore


class IngestRequest(BaseModel):
    source: str
    format: str = "plain-text"
    content: str


class QueryRequest(BaseModel):
    query: str
    k: int | None = None
    mode: str | None = None
    nprobe: int | None = None


class AskRequest(BaseModel):
    query: str
    k: int | None = None
    budget: int | None = None


class RebuildRequest(BaseModel):
    mode: str
    nlist: int | None = None
    pq_m: int | None = None
    pq_bits: int | None = None


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


_ERROR_MAP: list[tuple[type, int, str]] = [
    (DocumentDecodeError, 400, "decode_error"),
    (EmptyDocumentError, 400, "empty_document"),
    (EmptyIndexError, 409, "empty_index"),
    (RebuildInProgressError, 409, "rebuild_in_progress"),
    (EmbedderTransportError, 503, "embedder_unavailable"),
    (LlmTransportError, 502, "llm_unavailable"),
    (StoreCorruptionError, 409, "conflict"),
]


def create_app(store: CorpusStore) -> FastAPI:
    app = FastAPI(title="lkb", docs_url=None, redoc_url=None)
    # Single-node offline deployment with no auth; open CORS lets the
    # operator console be served from any local static file server.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error_response(400, "bad_request", str(exc.errors()))

    @app.exception_handler(ValueError)
    async def _value_error_handler(request: Request, exc: ValueError):
        return _error_response(400, "bad_request", str(exc))

    @app.exception_handler(LkbError)
    async def _lkb_error_handler(request: Request, exc: LkbError):
        for exc_type, status, code in _ERROR_MAP:
            if isinstance(exc, exc_type):
                return _error_response(status, code, str(exc))
        return _error_response(500, "internal_error", str(exc))

    @app.post("/v1/documents")
    def ingest(body: IngestRequest):
        doc, chunk_count, _ = store.ingest(
            body.content.encode("utf-8"), body.format, body.source
        )
        return {"doc_id": doc.doc_id, "chunk_count": chunk_count}

    @app.post("/v1/query")
    def query(body: QueryRequest):
        return store.query_payload(body.query, k=body.k, mode=body.mode, nprobe=body.nprobe)

    @app.post("/v1/ask")
    def ask(body: AskRequest):
        return store.ask_payload(body.query, k=body.k, budget=body.budget)

    @app.get("/v1/health")
    def health():
        return store.health()

    @app.get("/v1/index/stats")
    def index_stats():
        return store.index_stats()

    @app.post("/v1/index/rebuild")
    def rebuild(body: RebuildRequest):
        return store.rebuild(
            body.mode, nlist=body.nlist, pq_m=body.pq_m, pq_bits=body.pq_bits
        )

    return app
