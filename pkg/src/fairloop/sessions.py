"""Feedback sessions: provisional predictions resolved by the user or a timeout.

A session opens when a prediction is shown, then resolves exactly once:
by timely user feedback (blank confirms, a valid different label corrects,
invalid text falls back to the prediction, a DECLINE token refuses
classification) or by automatic confirmation once the feedback window t1
elapses. Resolution is linearized per session: the first resolver wins and
every later call observes the same final label.

Timestamps are injected so timeout behavior is deterministic under test;
production stores default to the wall clock.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

from .classifier import Prediction
from .labels import UNCLASSIFIABLE, GenderLabel, LabelSet, _UnclassifiableType, validate_feedback

#: Reserved token for refusing classification. Compared exactly (case
#: sensitive) before label validation, so it can never collide with a
#: folded label name.
DECLINE_TOKEN = "DECLINE"

#: Sweep granularity for timeout resolution, seconds.
DEFAULT_TICK = 0.05


class UnknownSession(KeyError):
    pass


class InvalidTimeout(ValueError):
    pass


class Unresolved(ValueError):
    """Latency was requested for a session that has not resolved yet."""


class SessionState(Enum):
    AWAITING = "awaiting"
    RESOLVED = "resolved"


class Provenance(str, Enum):
    AUTO_CONFIRMED = "auto_confirmed"
    USER_CONFIRMED = "user_confirmed"
    USER_CORRECTED = "user_corrected"
    USER_DECLINED = "user_declined"
    INVALID_FALLBACK = "invalid_fallback"


@dataclass(frozen=True)
class FinalLabel:
    label: GenderLabel | _UnclassifiableType
    provenance: Provenance
    resolved_at: float

    def __post_init__(self) -> None:
        declined = self.provenance is Provenance.USER_DECLINED
        if declined != (self.label is UNCLASSIFIABLE):
            raise ValueError("the unclassifiable sentinel pairs exactly with USER_DECLINED")


class FeedbackSession:
    """One state-machine instance; transitions AWAITING -> RESOLVED once."""

    def __init__(
        self,
        session_id: str,
        record_id: str,
        predicted: Prediction,
        label_set: LabelSet,
        opened_at: float,
        t1: float,
        classified_at: float | None = None,
    ):
        if t1 <= 0:
            raise InvalidTimeout(f"t1 must be positive, got {t1!r}")
        self.session_id = session_id
        self.record_id = record_id
        self.predicted = predicted
        self.label_set = label_set
        self.label_set_version = label_set.version
        self.opened_at = opened_at
        self.t1 = t1
        self.deadline = opened_at + t1
        self.classified_at = opened_at if classified_at is None else classified_at
        self.state = SessionState.AWAITING
        self.resolution: FinalLabel | None = None
        self._lock = threading.Lock()


def resolution_latency(session: FeedbackSession) -> float:
    """Seconds from the start of classification to resolution."""
    if session.resolution is None:
        raise Unresolved(f"session {session.session_id} has not resolved")
    return session.resolution.resolved_at - session.classified_at


class SessionStore:
    """Concurrent session registry with exactly-once resolution.

    ``clock`` supplies the current time when an operation is not given an
    explicit ``now``. Resolutions append to an in-memory audit trail and,
    when ``audit_path`` is set, to a JSON-lines file.
    """

    def __init__(
        self,
        clock: Callable[[], float] = time.time,
        audit_path: str | Path | None = None,
        id_factory: Callable[[], str] | None = None,
    ):
        self.clock = clock
        self.audit_path = Path(audit_path) if audit_path is not None else None
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self._sessions: dict[str, FeedbackSession] = {}
        self._registry_lock = threading.Lock()
        self._audit_lock = threading.Lock()
        self.audit: list[dict] = []

    def _now(self, now: float | None) -> float:
        return self.clock() if now is None else now

    def open_session(
        self,
        predicted: Prediction,
        record_id: str,
        t1: float,
        label_set: LabelSet,
        now: float | None = None,
        classified_at: float | None = None,
    ) -> FeedbackSession:
        """Open an AWAITING session whose deadline is ``now + t1``."""
        opened_at = self._now(now)
        session = FeedbackSession(
            session_id=self._id_factory(),
            record_id=record_id,
            predicted=predicted,
            label_set=label_set,
            opened_at=opened_at,
            t1=t1,
            classified_at=classified_at,
        )
        with self._registry_lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> FeedbackSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(session_id) from None

    def submit_feedback(self, session_id: str, raw: str | None, now: float | None = None) -> FinalLabel:
        """Apply user feedback; idempotent read once the session is resolved."""
        final, _ = self.resolve_feedback(session_id, raw, now)
        return final

    def resolve_feedback(
        self, session_id: str, raw: str | None, now: float | None = None
    ) -> tuple[FinalLabel, bool]:
        """Like submit_feedback, but also report whether this feedback counted.

        The second element is False when the feedback was discarded: the
        session had already resolved, or the window had closed (in which
        case this call performs the automatic confirmation itself).
        """
        session = self.get(session_id)
        now = self._now(now)
        with session._lock:
            if session.state is SessionState.RESOLVED:
                assert session.resolution is not None
                return session.resolution, False
            if now >= session.deadline:
                # The window closed before this feedback: the timeout rules.
                final = FinalLabel(session.predicted.label, Provenance.AUTO_CONFIRMED, now)
                self._resolve_locked(session, final)
                return final, False
            token = (raw or "").strip()
            if token == DECLINE_TOKEN:
                final = FinalLabel(UNCLASSIFIABLE, Provenance.USER_DECLINED, now)
            else:
                verdict = validate_feedback(raw, session.label_set)
                if verdict.is_blank:
                    final = FinalLabel(session.predicted.label, Provenance.USER_CONFIRMED, now)
                elif verdict.is_valid and verdict.label == session.predicted.label:
                    final = FinalLabel(verdict.label, Provenance.USER_CONFIRMED, now)
                elif verdict.is_valid:
                    assert verdict.label is not None
                    final = FinalLabel(verdict.label, Provenance.USER_CORRECTED, now)
                else:
                    final = FinalLabel(session.predicted.label, Provenance.INVALID_FALLBACK, now)
            self._resolve_locked(session, final)
            return final, True

    def expire(self, session_id: str, now: float | None = None) -> FinalLabel | None:
        """Auto-confirm if the deadline passed; no effect otherwise.

        Returns the resolution only when this call performed it.
        """
        session = self.get(session_id)
        now = self._now(now)
        with session._lock:
            if session.state is SessionState.RESOLVED:
                return None
            if now < session.deadline:
                return None
            final = FinalLabel(session.predicted.label, Provenance.AUTO_CONFIRMED, now)
            self._resolve_locked(session, final)
            return final

    def expire_due(self, now: float | None = None) -> list[FinalLabel]:
        """Expire every awaiting session whose deadline has passed."""
        now = self._now(now)
        with self._registry_lock:
            candidates = list(self._sessions.values())
        fired = []
        for session in candidates:
            final = self.expire(session.session_id, now)
            if final is not None:
                fired.append(final)
        return fired

    def _resolve_locked(self, session: FeedbackSession, final: FinalLabel) -> None:
        # Caller holds session._lock and has checked state is AWAITING.
        if final.provenance is Provenance.AUTO_CONFIRMED and final.label != session.predicted.label:
            raise ValueError("automatic confirmation must keep the predicted label")
        if final.provenance is Provenance.USER_CORRECTED:
            if final.label == session.predicted.label or final.label not in session.label_set:
                raise ValueError("corrections must be a different label from the session's set")
        session.resolution = final
        session.state = SessionState.RESOLVED
        self._append_audit(session, final)

    def _append_audit(self, session: FeedbackSession, final: FinalLabel) -> None:
        entry = {
            "session_id": session.session_id,
            "record_id": session.record_id,
            "predicted": session.predicted.label.name,
            "final": None if final.label is UNCLASSIFIABLE else final.label.name,
            "provenance": final.provenance.value,
            "t1": session.t1,
            "opened_at": session.opened_at,
            "resolved_at": final.resolved_at,
        }
        with self._audit_lock:
            self.audit.append(entry)
            if self.audit_path is not None:
                self.audit_path.parent.mkdir(parents=True, exist_ok=True)
                with self.audit_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry) + "\n")


class ExpirySweeper:
    """Background thread that fires timeouts server-side every ``tick`` seconds."""

    def __init__(self, store: SessionStore, tick: float = DEFAULT_TICK):
        self.store = store
        self.tick = tick
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._run, name="expiry-sweeper", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        self._stop.clear()

    def _run(self) -> None:
        while not self._stop.wait(self.tick):
            self.store.expire_due()


class ManualClock:
    """Deterministic clock for tests and simulation."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def __call__(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        self._now += seconds
        return self._now

    def set(self, value: float) -> float:
        self._now = value
        return self._now
