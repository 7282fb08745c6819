from .app import CreateSessionRequest, QueryRequest, StageFailure, create_app
from .store import HistoryEntry, Session, SessionStore

__all__ = [
    "CreateSessionRequest",
    "HistoryEntry",
    "QueryRequest",
    "Session",
    "SessionStore",
    "StageFailure",
    "create_app",
]
