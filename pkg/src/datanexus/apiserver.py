"""HTTP/JSON facade: search, record detail, links, citations, stats, log intake.

All state lives in one ``ServerState``. The searchable bundle (index plus
link summaries) is held behind a single attribute reference, so a reload
swaps it atomically while in-flight requests keep using the bundle they
started with. Event intake serializes writes with a lock; reads never
touch that lock.
"""

import json
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .analytics import UnknownActionError, UsageEvent
from .citations import CITATION_FORMATS, UnknownCitationFormatError, render_citation
from .ingest import CorpusSnapshot
from .jsonio import canonical_dumps, now_iso
from .linkstore import Link, LinkSummary, build_link_summaries, load_links
from .model import ALL_CATEGORIES, CATEGORY_VALUES
from .searchcore import (
    FACET_FIELDS,
    IndexSnapshot,
    QueryError,
    SearchQuery,
    execute_query,
    load_index,
    tokenize,
)

DEFAULT_PAGE_SIZE = 10


@dataclass
class ApiError(Exception):
    status: int
    code: str
    message: str

    def body(self) -> dict[str, Any]:
        return {"error": {"status": self.status, "code": self.code, "message": self.message}}


class EventLog:
    """Append-only JSONL sink; one lock serializes writers."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, doc: dict[str, Any]) -> None:
        line = canonical_dumps(doc) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)


@dataclass
class SearchBundle:
    index: IndexSnapshot
    summaries: dict[str, LinkSummary]
    links: list[Link]


class ServerState:
    def __init__(self, event_log: EventLog, bundle: SearchBundle | None = None):
        self.event_log = event_log
        self.bundle = bundle
        self.artifacts_dir: Path | None = None

    @classmethod
    def from_artifacts(cls, artifacts_dir: Path | str, event_log_path: Path | str) -> "ServerState":
        state = cls(EventLog(event_log_path))
        state.artifacts_dir = Path(artifacts_dir)
        state.reload()
        return state

    def reload(self) -> None:
        if self.artifacts_dir is None:
            raise RuntimeError("no artifacts directory configured")
        index_path = self.artifacts_dir / "index.json.gz"
        if not index_path.exists():
            raise FileNotFoundError(str(index_path))
        index = load_index(index_path)
        links_path = self.artifacts_dir / "links.jsonl"
        links = load_links(links_path) if links_path.exists() else []
        self.bundle = make_bundle(index, links)

    def require_bundle(self) -> SearchBundle:
        bundle = self.bundle
        if bundle is None or bundle.index is None:
            raise ApiError(503, "no-snapshot", "no search snapshot is loaded")
        return bundle


def make_bundle(index: IndexSnapshot, links: list[Link]) -> SearchBundle:
    corpus = CorpusSnapshot(records=index.records, built_at=index.built_at, source_report={})
    summaries, _ = build_link_summaries(corpus, links)
    # Refresh the per-hit badge counts so they always agree with the link
    # set actually being served, even if links changed after index build.
    index.link_counts = [summaries[rid].category_counts for rid in index.ordinal_to_id]
    return SearchBundle(index=index, summaries=summaries, links=links)


def _int_param(params, name: str, default: int) -> int:
    raw = params.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, "invalid-parameter", f"{name} must be an integer") from None


def create_app(state: ServerState) -> FastAPI:
    app = FastAPI(title="integrated search service", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(_request: Request, exc: StarletteHTTPException) -> JSONResponse:
        status = exc.status_code if exc.status_code in (400, 404, 422, 503) else 400
        err = ApiError(status, "http-error", str(exc.detail))
        return JSONResponse(status_code=status, content=err.body())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError) -> JSONResponse:
        err = ApiError(422, "validation-error", str(exc.errors()[:1]))
        return JSONResponse(status_code=422, content=err.body())

    @app.get("/api/health")
    async def health() -> dict[str, Any]:
        return {"status": "ok", "snapshot_loaded": state.bundle is not None}

    @app.get("/api/search")
    async def search(request: Request) -> dict[str, Any]:
        bundle = state.require_bundle()
        params = request.query_params
        category = params.get("type", ALL_CATEGORIES)
        facet_filters: dict[str, set[str]] = {}
        for facet in FACET_FIELDS:
            values = [v for v in params.getlist(facet) if v]
            if values:
                facet_filters[facet] = set(values)
        query = SearchQuery(
            terms=tokenize(params.get("q", "")),
            category=category,
            facet_filters=facet_filters,
            offset=_int_param(params, "from", 0),
            limit=_int_param(params, "size", DEFAULT_PAGE_SIZE),
        )
        try:
            result = execute_query(bundle.index, query)
        except QueryError as exc:
            raise ApiError(400, "invalid-query", str(exc)) from None
        return result.to_json()

    def _get_record(bundle: SearchBundle, record_id: str):
        record = bundle.index.records.get(record_id)
        if record is None:
            raise ApiError(404, "unknown-record", f"no record with id {record_id}")
        return record

    @app.get("/api/record/{record_id}")
    async def record_detail(record_id: str) -> dict[str, Any]:
        bundle = state.require_bundle()
        record = _get_record(bundle, record_id)
        summary = bundle.summaries.get(record_id)
        link_counts = summary.category_counts if summary else {}
        label_counts = summary.label_counts if summary else {}
        total_links = sum(link_counts.values())
        return {
            "record": record.to_json(),
            "link_counts": link_counts,
            "label_counts": label_counts,
            "has_links": total_links > 0,
            "citation_formats": list(CITATION_FORMATS),
        }

    @app.get("/api/record/{record_id}/links")
    async def record_links(record_id: str, request: Request) -> dict[str, Any]:
        bundle = state.require_bundle()
        _get_record(bundle, record_id)
        wanted = request.query_params.get("type")
        if wanted is not None and wanted not in CATEGORY_VALUES:
            raise ApiError(400, "invalid-category", f"unknown category: {wanted}")
        summary = bundle.summaries.get(record_id)
        entries = summary.entries if summary else []
        if wanted is not None:
            entries = [e for e in entries if e.category.value == wanted]
        return {
            "record_id": record_id,
            "type": wanted,
            "links": [e.to_json() for e in entries],
        }

    @app.get("/api/record/{record_id}/citation")
    async def citation(record_id: str, request: Request) -> Response:
        bundle = state.require_bundle()
        record = _get_record(bundle, record_id)
        fmt = request.query_params.get("format", "bibtex")
        try:
            text = render_citation(record, fmt)
        except UnknownCitationFormatError as exc:
            raise ApiError(400, "invalid-format", str(exc)) from None
        return PlainTextResponse(text)

    @app.post("/api/log")
    async def log_event(request: Request) -> dict[str, Any]:
        try:
            doc = json.loads(await request.body())
            if not isinstance(doc, dict):
                raise ValueError("event must be an object")
        except ValueError:
            raise ApiError(400, "invalid-json", "body must be a JSON object") from None
        if not doc.get("timestamp"):
            doc["timestamp"] = now_iso()
        try:
            UsageEvent.from_json(doc)
        except UnknownActionError as exc:
            raise ApiError(400, "unknown-action", str(exc)) from None
        except (ValueError, KeyError, TypeError) as exc:
            raise ApiError(400, "invalid-event", str(exc)) from None
        state.event_log.append(doc)
        return {"accepted": True}

    @app.get("/api/stats")
    async def stats() -> dict[str, Any]:
        bundle = state.require_bundle()
        by_category = Counter(bundle.index.categories)
        pairs: Counter[str] = Counter()
        for link in bundle.links:
            key = "|".join(sorted((link.from_category.value, link.to_category.value)))
            pairs[key] += 1
        return {
            "built_at": bundle.index.built_at,
            "record_count": bundle.index.doc_count,
            "records_by_category": {c: by_category.get(c, 0) for c in CATEGORY_VALUES},
            "link_count": len(bundle.links),
            "links_by_category_pair": dict(sorted(pairs.items())),
        }

    return app
