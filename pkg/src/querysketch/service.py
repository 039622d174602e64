"""HTTP/JSON facade over catalogs and synthesis sessions.

Wire format is versioned with a top-level ``"v": 1``. All sketch and query
text on the wire uses the surface syntax, so clients never see ASTs. Every
question payload carries previews of the tables a user needs to judge it:
the owning table for a column fill, both tables for a join fill.

Databases and sessions live in process memory; an optional persist
directory receives a JSON snapshot of each session after every mutation.
Requests touching one session are serialized by a per-session lock.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from . import lang as L
from .catalog import Catalog, load_database_from
from .engine import AWAITING, COMPLETE, SessionState, answer, start_session, undo
from .errors import (
    CatalogError,
    EmptyHistory,
    QuerySketchError,
    SessionComplete,
    SketchSyntaxError,
)
from .interp import evaluate
from .sampler import SamplerConfig

PREVIEW_ROWS = 5
MAX_RESULT_ROWS = 50

_CONFIG_FIELDS = ("sample_count", "mh_steps", "max_join_depth",
                  "rejection_retry_limit", "seed", "lambda_size")


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"v": 1, "error": message, **extra})


class ServiceState:
    def __init__(self, persist_dir: str | Path | None = None):
        self.databases: dict[str, Catalog] = {}
        self.sessions: dict[str, SessionState] = {}
        self.session_locks: dict[str, threading.Lock] = {}
        self.registry_lock = threading.Lock()
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)

    def add_database(self, catalog: Catalog) -> str:
        database_id = uuid.uuid4().hex[:12]
        with self.registry_lock:
            self.databases[database_id] = catalog
        return database_id

    def add_session(self, state: SessionState) -> str:
        session_id = uuid.uuid4().hex[:12]
        with self.registry_lock:
            self.sessions[session_id] = state
            self.session_locks[session_id] = threading.Lock()
        return session_id

    def persist(self, session_id: str) -> None:
        if not self.persist_dir:
            return
        state = self.sessions[session_id]
        path = self.persist_dir / f"{session_id}.json"
        path.write_text(json.dumps(state.to_document(), indent=2), encoding="utf-8")


def _preview_payload(catalog: Catalog, table: str, rows: int = PREVIEW_ROWS) -> dict:
    headers, data = catalog.preview(table, rows)
    return {"table": table, "columns": headers, "rows": [list(r) for r in data]}


def _question_payload(state: SessionState) -> dict | None:
    if state.pending is None:
        return None
    scored = state.pending
    question = scored.question
    return {
        "summary": question.summary(),
        "holes": list(question.target_holes()),
        "resulting_sketch": L.print_sketch(question.sketch),
        "previews": [_preview_payload(state.catalog, t)
                     for t in question.display_tables()],
        "pi_plus_hat": scored.pi_plus_hat,
        "score_hat": scored.score_hat,
    }


def _final_payload(state: SessionState) -> dict | None:
    if state.status != COMPLETE:
        return None
    result = evaluate(state.sketch, state.catalog)
    headers, rows = result.display()
    return {
        "query": L.print_sketch(state.sketch),
        "result": {"columns": headers, "rows": [list(r) for r in rows[:MAX_RESULT_ROWS]],
                   "row_count": len(rows)},
    }


def _session_resource(session_id: str, state: SessionState) -> dict:
    return {
        "v": 1,
        "session_id": session_id,
        "status": state.status,
        "sketch": L.print_sketch(state.sketch),
        "question": _question_payload(state),
        "final": _final_payload(state),
        "failure": state.failure,
        "history": [
            {"question": h.question.question.summary(), "answer": h.answer}
            for h in state.history
        ],
        "iteration": state.iteration,
    }


def _parse_config(doc: dict | None) -> tuple[SamplerConfig, bool]:
    doc = doc or {}
    kwargs = {k: doc[k] for k in _CONFIG_FIELDS if k in doc}
    return SamplerConfig(**kwargs), bool(doc.get("no_soft", False))


def create_app(service: ServiceState | None = None) -> FastAPI:
    app = FastAPI(title="querysketch", version="1")
    state = service or ServiceState()
    app.state.service = state

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.post("/databases", status_code=201)
    def create_database(payload: dict = Body(...)):
        schema_doc = payload.get("schema")
        if schema_doc is None:
            return _error(400, "missing 'schema'")
        try:
            if "csv" in payload:
                catalog = load_database_from(schema_doc, ".", inline_csv=payload["csv"])
            elif "data_dir" in payload:
                catalog = load_database_from(schema_doc, payload["data_dir"])
            else:
                return _error(400, "provide 'csv' (inline data) or 'data_dir'")
        except CatalogError as exc:
            return _error(400, str(exc))
        database_id = state.add_database(catalog)
        return {"v": 1, "database_id": database_id, "tables": catalog.table_names()}

    @app.get("/databases/{database_id}/tables")
    def list_tables(database_id: str):
        catalog = state.databases.get(database_id)
        if catalog is None:
            return _error(404, "unknown database")
        return {"v": 1, "tables": catalog.table_names()}

    @app.get("/databases/{database_id}/tables/{table}/preview")
    def preview_table(database_id: str, table: str, rows: int = PREVIEW_ROWS):
        catalog = state.databases.get(database_id)
        if catalog is None:
            return _error(404, "unknown database")
        if not catalog.has_table(table):
            return _error(404, f"unknown table '{table}'")
        return {"v": 1, **_preview_payload(catalog, table, rows)}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        database_id = payload.get("database_id")
        catalog = state.databases.get(database_id or "")
        if catalog is None:
            return _error(404, "unknown database")
        sketch_text = payload.get("sketch")
        if not isinstance(sketch_text, str):
            return _error(400, "missing 'sketch'")
        try:
            cfg, no_soft = _parse_config(payload.get("config"))
        except (TypeError, ValueError) as exc:
            return _error(400, f"bad config: {exc}")
        try:
            if no_soft:
                sketch_text = L.print_sketch(L.strip_soft(L.parse_sketch(sketch_text, catalog)))
            session = start_session(sketch_text, catalog, cfg)
        except SketchSyntaxError as exc:
            return _error(422, str(exc), line=exc.line, column=exc.column)
        except QuerySketchError as exc:
            return _error(422, str(exc))
        session_id = state.add_session(session)
        state.persist(session_id)
        return _session_resource(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        with state.session_locks[session_id]:
            return _session_resource(session_id, session)

    @app.post("/sessions/{session_id}/answer")
    def answer_session(session_id: str, payload: dict = Body(...)):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        if "accept" not in payload or not isinstance(payload["accept"], bool):
            return _error(400, "body must carry a boolean 'accept'")
        with state.session_locks[session_id]:
            if session.status != AWAITING:
                return _error(409, f"session is not awaiting an answer ({session.status})")
            try:
                answer(session, payload["accept"])
            except SessionComplete as exc:
                return _error(409, str(exc))
            state.persist(session_id)
            return _session_resource(session_id, session)

    @app.post("/sessions/{session_id}/undo")
    def undo_session(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        with state.session_locks[session_id]:
            try:
                undo(session)
            except EmptyHistory as exc:
                return _error(409, str(exc))
            state.persist(session_id)
            return _session_resource(session_id, session)

    return app
