"""In-memory session registry with optional snapshot persistence.

A session owns a chart and the state those queries have driven it to.
Queries within one session are serialized behind a per-session lock;
different sessions never contend.  Snapshots persist only the durable
facts (chart document plus the query log), because replaying the log
against a fresh chart reproduces the state exactly.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..chart.model import ChartSpec, ChartState, initial_state, load_chart_spec, spec_to_json
from ..errors import UnknownSession


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class HistoryEntry:
    kind: str  # "query" or "reset"
    query: str
    task_text: str | None
    plan: tuple[dict, ...]
    keyframe_count: int
    timestamp: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "query": self.query,
            "task": self.task_text,
            "plan": [dict(p) for p in self.plan],
            "keyframeCount": self.keyframe_count,
            "timestamp": self.timestamp,
        }


@dataclass
class Session:
    id: str
    spec: ChartSpec
    state: ChartState
    history: list[HistoryEntry] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(
        self,
        *,
        kind: str,
        query: str = "",
        task_text: str | None = None,
        plan: tuple[dict, ...] = (),
        keyframe_count: int = 0,
    ) -> None:
        self.history.append(
            HistoryEntry(kind, query, task_text, plan, keyframe_count, _now())
        )


class SessionStore:
    """Least-recently-used map of live sessions, bounded by capacity."""

    def __init__(self, capacity: int = 64, snapshot_path: str | Path | None = None):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self.snapshot_path = Path(snapshot_path) if snapshot_path else None
        self._sessions: OrderedDict[str, Session] = OrderedDict()
        self._lock = threading.Lock()

    def create(self, spec: ChartSpec) -> Session:
        session = Session(id=uuid.uuid4().hex, spec=spec, state=initial_state(spec))
        with self._lock:
            self._sessions[session.id] = session
            while len(self._sessions) > self.capacity:
                self._sessions.popitem(last=False)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            try:
                session = self._sessions[session_id]
            except KeyError:
                raise UnknownSession(f"no session {session_id!r}") from None
            self._sessions.move_to_end(session_id)
            return session

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)

    # Snapshots keep the chart document and the raw query log; state is
    # rebuilt by replay, so nothing transient needs serializing.
    def save_snapshot(self) -> None:
        if self.snapshot_path is None:
            return
        with self._lock:
            payload = [
                {
                    "id": s.id,
                    "chart": spec_to_json(s.spec),
                    "log": [
                        {"kind": e.kind, "query": e.query} for e in s.history
                    ],
                }
                for s in self._sessions.values()
            ]
        self.snapshot_path.write_text(json.dumps(payload, ensure_ascii=False))

    def load_snapshot(self, run_query) -> int:
        """Restore sessions by replaying their logs through run_query.

        run_query is the service-level query executor (session, text);
        passing it in keeps the store free of translator dependencies.
        Returns the number of sessions restored.
        """
        if self.snapshot_path is None or not self.snapshot_path.exists():
            return 0
        restored = 0
        for item in json.loads(self.snapshot_path.read_text()):
            spec = load_chart_spec(item["chart"])
            session = Session(id=item["id"], spec=spec, state=initial_state(spec))
            for entry in item["log"]:
                if entry["kind"] == "reset":
                    session.state = initial_state(spec)
                    session.record(kind="reset")
                else:
                    run_query(session, entry["query"])
            with self._lock:
                self._sessions[session.id] = session
            restored += 1
        return restored
