"""HTTP facade over the translate, plan, and apply pipeline.

One session per uploaded chart.  A query advances the session's state
only when every stage succeeds; any failure reports which stage broke
and leaves the chart exactly as it was.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..chart.model import initial_state, load_chart_spec, state_hash
from ..chart.svg import render_svg
from ..errors import ChartQueryError, SchemaError, UnknownSession
from ..manip import apply_all, keyframes_to_json, plan, plan_to_json
from ..taskir import serialize_task, task_to_json
from ..translate import RemoteTranslator, RulesTranslator
from .store import Session, SessionStore


class CreateSessionRequest(BaseModel):
    spec: dict = Field(description="chart document: attributes, rows, encodings")


class QueryRequest(BaseModel):
    text: str


class StageFailure(Exception):
    """A pipeline stage rejected the query; session state is untouched."""

    def __init__(self, stage: str, cause: ChartQueryError) -> None:
        super().__init__(str(cause))
        self.stage = stage
        self.cause = cause

    def payload(self) -> dict:
        return {
            "stage": self.stage,
            "error": type(self.cause).__name__,
            "detail": str(self.cause),
        }


def create_app(
    *,
    capacity: int = 64,
    snapshot_path: str | Path | None = None,
    backend: str = "rules",
) -> FastAPI:
    app = FastAPI(title="chartquery", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(capacity=capacity, snapshot_path=snapshot_path)
    translator = RemoteTranslator() if backend == "remote" else RulesTranslator()
    app.state.store = store

    def run_query(session: Session, text: str):
        """Translate, plan, and apply under the session lock.

        State is reassigned only after apply_all returns, so a failure
        at any stage leaves the previous state object untouched.
        """
        with session.lock:
            stage = "translate"
            try:
                translation = translator.translate(text, session.spec, session.state)
                stage = "plan"
                steps = plan(translation.task, session.state)
                stage = "apply"
                frames = apply_all(steps, session.state)
            except ChartQueryError as exc:
                raise StageFailure(stage, exc) from exc
            session.state = frames[-1].state
            session.record(
                kind="query",
                query=text,
                task_text=serialize_task(translation.task),
                plan=tuple(plan_to_json(steps)),
                keyframe_count=len(frames),
            )
            return translation, steps, frames

    def replay_entry(session: Session, text: str) -> None:
        try:
            run_query(session, text)
        except StageFailure:
            pass  # stale snapshot line; better to drop it than refuse to start

    app.state.restored_sessions = store.load_snapshot(replay_entry)

    @app.exception_handler(StageFailure)
    async def stage_failure(_: Request, exc: StageFailure) -> JSONResponse:
        return JSONResponse(status_code=422, content=exc.payload())

    @app.exception_handler(UnknownSession)
    async def unknown_session(_: Request, exc: UnknownSession) -> JSONResponse:
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(SchemaError)
    async def schema_error(_: Request, exc: SchemaError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"error": "SchemaError", "detail": str(exc)}
        )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "sessions": len(store)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        spec = load_chart_spec(body.spec)
        session = store.create(spec)
        store.save_snapshot()
        return {
            "sessionId": session.id,
            "title": spec.title,
            "svg": render_svg(session.state),
            "stateHash": state_hash(session.state),
        }

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str) -> dict:
        session = store.get(session_id)
        return {
            "sessionId": session.id,
            "title": session.spec.title,
            "svg": render_svg(session.state),
            "stateHash": state_hash(session.state),
            "historyLength": len(session.history),
        }

    @app.post("/sessions/{session_id}/query")
    def query(session_id: str, body: QueryRequest) -> dict:
        session = store.get(session_id)
        translation, steps, frames = run_query(session, body.text)
        store.save_snapshot()
        return {
            "task": {
                "text": serialize_task(translation.task),
                "tree": task_to_json(translation.task),
            },
            "plan": plan_to_json(steps),
            "keyframes": keyframes_to_json(frames),
            "stateHash": state_hash(session.state),
        }

    @app.post("/sessions/{session_id}/reset")
    def reset(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            session.state = initial_state(session.spec)
            session.record(kind="reset")
        store.save_snapshot()
        return {"ok": True, "stateHash": state_hash(session.state)}

    @app.get("/sessions/{session_id}/history")
    def history(session_id: str) -> dict:
        session = store.get(session_id)
        return {"entries": [e.to_json() for e in session.history]}

    return app
