"""Two-tier persistence: a short-term session store and a long-term
result log.

Results append to a newline-delimited JSON log on disk with an in-memory
index; appends are serialized by a single writer lock and records are
immutable, so a restart reloads the identical responses. Sessions live in
memory with a TTL; expiry reports the timestamp at which the session
lapsed.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable

from .session import SessionState

DEFAULT_SESSION_TTL = 24 * 3600.0


class UnknownIdError(KeyError):
    pass


class SessionExpiredError(KeyError):
    def __init__(self, session_id: str, expired_at: float):
        self.session_id = session_id
        self.expired_at = expired_at
        super().__init__(f"session {session_id} expired at {expired_at:.3f}")


@dataclass(frozen=True)
class StoredResult:
    result_id: str
    timestamp: float
    request: dict
    response: dict
    session_id: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "result_id": self.result_id,
            "timestamp": self.timestamp,
            "request": self.request,
            "response": self.response,
            "session_id": self.session_id,
        }


class ResultStore:
    """Append-only NDJSON log with an in-memory id index."""

    def __init__(self, data_dir: str):
        self._path = os.path.join(data_dir, "results.ndjson")
        self._lock = threading.Lock()
        self._index: dict[str, StoredResult] = {}
        self._seq = 0
        os.makedirs(data_dir, exist_ok=True)
        self._load()

    def _load(self) -> None:
        if not os.path.exists(self._path):
            return
        with open(self._path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                record = StoredResult(
                    result_id=raw["result_id"], timestamp=raw["timestamp"],
                    request=raw["request"], response=raw["response"],
                    session_id=raw.get("session_id"))
                self._index[record.result_id] = record
        self._seq = len(self._index)

    def append(self, request: dict, response: dict,
               session_id: str | None = None, now: float | None = None) -> StoredResult:
        with self._lock:
            self._seq += 1
            record = StoredResult(
                result_id=f"r-{self._seq:06d}",
                timestamp=time.time() if now is None else now,
                request=request, response=response, session_id=session_id)
            line = json.dumps(record.to_json(), sort_keys=True)
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            # index the serialized form so reads after a restart are
            # byte-identical to reads before it
            raw = json.loads(line)
            record = StoredResult(
                result_id=raw["result_id"], timestamp=raw["timestamp"],
                request=raw["request"], response=raw["response"],
                session_id=raw.get("session_id"))
            self._index[record.result_id] = record
        return record

    def get(self, result_id: str) -> StoredResult:
        try:
            return self._index[result_id]
        except KeyError:
            raise UnknownIdError(result_id) from None

    def __len__(self) -> int:
        return len(self._index)


class SessionStore:
    """Short-term session state with TTL; per-session writes serialized."""

    def __init__(self, ttl_seconds: float = DEFAULT_SESSION_TTL,
                 clock: Callable[[], float] = time.time):
        self._ttl = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}

    def put(self, state: SessionState) -> None:
        with self._lock:
            self._sessions[state.id] = state
            self._locks.setdefault(state.id, threading.Lock())

    def get(self, session_id: str) -> SessionState:
        with self._lock:
            state = self._sessions.get(session_id)
        if state is None:
            raise UnknownIdError(session_id)
        expiry = state.updated + self._ttl
        if self._clock() > expiry:
            raise SessionExpiredError(session_id, expiry)
        return state

    def mutate(self, session_id: str,
               fn: Callable[[SessionState], tuple[SessionState, Any]]) -> Any:
        """Apply fn under the session's lock; distinct sessions do not block
        each other."""
        with self._lock:
            lock = self._locks.get(session_id)
        if lock is None:
            raise UnknownIdError(session_id)
        with lock:
            state = self.get(session_id)
            new_state, out = fn(state)
            with self._lock:
                self._sessions[session_id] = new_state
        return out
