"""Opt-in retention of feedback-resolved datapoints for retraining.

Nothing is persisted unless the user explicitly consented for that
session: without a consent=true input anywhere in a run the training
store stays byte-for-byte empty. Only user-driven resolutions
(confirmations and corrections) are retainable; silence, invalid-text
fallbacks and declines never enter training data. There is no export
path to third parties by construction.

Storage is an append-only JSON-lines file. Purges append a tombstone
``{"purge": record_id}``; ``compact()`` rewrites the file without dead
records.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .classifier import FeatureVector
from .labels import GenderLabel
from .sessions import FeedbackSession, Provenance, SessionState

#: Resolutions eligible for retention. Auto-confirmations are excluded:
#: silence is not confirmation, and invalid-text fallbacks carry no
#: user-asserted label.
TRAINABLE_PROVENANCES = frozenset({Provenance.USER_CONFIRMED, Provenance.USER_CORRECTED})


class SessionUnresolved(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConsentedDatapoint:
    record_id: str
    features: FeatureVector
    final_label: GenderLabel
    provenance: Provenance
    stored_at: float


class ConsentStore:
    """Append-only consented training store with tombstone purges."""

    def __init__(self, path: str | Path | None = None, clock: Callable[[], float] = time.time):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: list[ConsentedDatapoint] = []
        if self.path is not None and self.path.exists():
            self._replay(self.path)

    def _replay(self, path: Path) -> None:
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if "purge" in obj:
                self._entries = [e for e in self._entries if e.record_id != obj["purge"]]
                continue
            self._entries.append(
                ConsentedDatapoint(
                    record_id=obj["record_id"],
                    features=FeatureVector(obj["features"]),
                    final_label=GenderLabel(obj["label"]),
                    provenance=Provenance(obj["provenance"]),
                    stored_at=obj["stored_at"],
                )
            )

    def __len__(self) -> int:
        return len(self._entries)

    def record(self, session: FeedbackSession, features: FeatureVector, consent: bool) -> bool:
        """Retain the session's resolution when (and only when) consented.

        Returns True iff a datapoint was stored. When it returns False,
        nothing was written anywhere.
        """
        if session.state is not SessionState.RESOLVED or session.resolution is None:
            raise SessionUnresolved(f"session {session.session_id} has not resolved")
        final = session.resolution
        if not consent:
            return False
        if not isinstance(final.label, GenderLabel):
            return False
        if final.provenance not in TRAINABLE_PROVENANCES:
            return False
        point = ConsentedDatapoint(
            record_id=session.record_id,
            features=features,
            final_label=final.label,
            provenance=final.provenance,
            stored_at=self.clock(),
        )
        with self._lock:
            self._entries.append(point)
            self._append_line(
                {
                    "record_id": point.record_id,
                    "features": [float(x) for x in point.features.values],
                    "label": point.final_label.name,
                    "provenance": point.provenance.value,
                    "stored_at": point.stored_at,
                }
            )
        return True

    def export_training_batch(
        self, min_label_counts: dict[GenderLabel, int] | None = None
    ) -> list[tuple[FeatureVector, GenderLabel]]:
        """Return all consented datapoints, gated on minimum per-label counts.

        The batch is empty whenever any requested label's stored count
        falls below its minimum, so retraining never runs on a class with
        too little consented data.
        """
        with self._lock:
            entries = list(self._entries)
        if min_label_counts:
            counts: dict[GenderLabel, int] = {}
            for e in entries:
                counts[e.final_label] = counts.get(e.final_label, 0) + 1
            for label, minimum in min_label_counts.items():
                if counts.get(label, 0) < minimum:
                    return []
        return [(e.features, e.final_label) for e in entries]

    def label_counts(self) -> dict[GenderLabel, int]:
        with self._lock:
            counts: dict[GenderLabel, int] = {}
            for e in self._entries:
                counts[e.final_label] = counts.get(e.final_label, 0) + 1
            return counts

    def purge(self, record_id: str) -> bool:
        """Drop every stored datapoint for ``record_id``; False if none existed."""
        with self._lock:
            before = len(self._entries)
            self._entries = [e for e in self._entries if e.record_id != record_id]
            if len(self._entries) == before:
                return False
            self._append_line({"purge": record_id})
            return True

    def compact(self) -> None:
        """Rewrite the file with live records only (drops tombstones)."""
        if self.path is None:
            return
        with self._lock:
            if not self._entries:
                if self.path.exists():
                    self.path.unlink()
                return
            lines = [
                json.dumps(
                    {
                        "record_id": e.record_id,
                        "features": [float(x) for x in e.features.values],
                        "label": e.final_label.name,
                        "provenance": e.provenance.value,
                        "stored_at": e.stored_at,
                    }
                )
                for e in self._entries
            ]
            self.path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def _append_line(self, obj: dict) -> None:
        # Lazy file creation keeps the store byte-for-byte empty until the
        # first real consent.
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(obj) + "\n")
