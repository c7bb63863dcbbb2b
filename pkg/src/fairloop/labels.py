"""Versioned gender-label vocabulary and feedback validation.

Label sets are immutable snapshots: extending one produces a new version
with the new labels appended. Labels are never removed, so datapoints
recorded under older versions stay interpretable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable


class DuplicateLabel(ValueError):
    """An extension tried to add a label that is already in the set."""


class EmptyExtension(ValueError):
    """An extension carried no new labels."""


def _fold(raw: str) -> str:
    return raw.strip().casefold()


@dataclass(frozen=True, order=True)
class GenderLabel:
    """A single gender label, normalized to a folded lowercase token.

    Comparison, hashing and ordering all work on the folded name, so
    ``GenderLabel(" WoMan ") == GenderLabel("woman")``. Names must be
    single tokens (no internal whitespace, commas or tabs) so they
    survive the line-oriented wire formats unescaped.
    """

    name: str

    def __post_init__(self) -> None:
        folded = _fold(self.name)
        if not folded:
            raise ValueError("label name must be non-empty")
        if any(ch.isspace() or ch in ",\t" for ch in folded):
            raise ValueError(f"label name must be a single token: {folded!r}")
        object.__setattr__(self, "name", folded)

    def __str__(self) -> str:
        return self.name


class _UnclassifiableType:
    """Singleton marker for people who reject gender classification.

    Distinct from every GenderLabel; never a member of a LabelSet and
    never emitted by the classifier. It exists so a user's refusal can
    be represented without inventing a pseudo-label.
    """

    _instance = None

    def __new__(cls) -> "_UnclassifiableType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNCLASSIFIABLE"

    def __reduce__(self):
        return (_UnclassifiableType, ())


UNCLASSIFIABLE = _UnclassifiableType()

#: Labels present in version 1 of every registry.
INITIAL_LABELS = (GenderLabel("man"), GenderLabel("woman"), GenderLabel("non-binary"))


@dataclass(frozen=True)
class LabelSet:
    """One immutable version of the label vocabulary."""

    version: int
    labels: tuple[GenderLabel, ...]
    created_at: int = 0  # logical tick

    def __post_init__(self) -> None:
        if self.version < 1:
            raise ValueError("version must be >= 1")
        if len(set(self.labels)) != len(self.labels):
            raise DuplicateLabel("label set contains duplicates")
        object.__setattr__(self, "labels", tuple(self.labels))

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def find(self, raw: str) -> GenderLabel | None:
        folded = _fold(raw)
        for label in self.labels:
            if label.name == folded:
                return label
        return None


def initial_label_set(created_at: int = 0) -> LabelSet:
    return LabelSet(version=1, labels=INITIAL_LABELS, created_at=created_at)


class Verdict(Enum):
    BLANK = "blank"
    VALID = "valid"
    INVALID = "invalid"


@dataclass(frozen=True)
class FeedbackVerdict:
    """Outcome of checking raw user feedback against a label set."""

    kind: Verdict
    label: GenderLabel | None = None

    @property
    def is_blank(self) -> bool:
        return self.kind is Verdict.BLANK

    @property
    def is_valid(self) -> bool:
        return self.kind is Verdict.VALID

    @property
    def is_invalid(self) -> bool:
        return self.kind is Verdict.INVALID


def validate_feedback(raw: str | None, label_set: LabelSet) -> FeedbackVerdict:
    """Classify raw feedback text as blank, a valid label, or invalid.

    Total and deterministic: blank means empty/whitespace-only (or None),
    valid means the folded text equals a member of ``label_set``, and
    everything else is invalid. Folding makes the check robust to the
    case and padding of human-typed input.
    """
    if raw is None or not raw.strip():
        return FeedbackVerdict(Verdict.BLANK)
    label = label_set.find(raw)
    if label is not None:
        return FeedbackVerdict(Verdict.VALID, label)
    return FeedbackVerdict(Verdict.INVALID)


def extend(label_set: LabelSet, new_labels: Iterable[GenderLabel]) -> LabelSet:
    """Return the next label-set version with ``new_labels`` appended.

    Extension-only: removal is not supported anywhere. Order of existing
    labels is preserved and new labels keep their given order.
    """
    new = tuple(new_labels)
    if not new:
        raise EmptyExtension("extension must add at least one label")
    seen = set(label_set.labels)
    for label in new:
        if label in seen:
            raise DuplicateLabel(f"label already present: {label.name}")
        seen.add(label)
    return LabelSet(
        version=label_set.version + 1,
        labels=label_set.labels + new,
        created_at=label_set.created_at + 1,
    )


class LabelRegistry:
    """Serialized single-writer owner of the label-set history.

    Readers may hold any version concurrently (LabelSet is immutable);
    extensions happen under a lock. When ``path`` is given, every version
    is appended to a line-oriented text file: ``version<TAB>l1,l2,...``.
    """

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._path = Path(path) if path is not None else None
        self._versions: dict[int, LabelSet] = {}
        if self._path is not None and self._path.exists() and self._path.stat().st_size:
            for line in self._path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                version_text, _, labels_text = line.partition("\t")
                labels = tuple(GenderLabel(tok) for tok in labels_text.split(","))
                ls = LabelSet(int(version_text), labels, created_at=int(version_text) - 1)
                self._versions[ls.version] = ls
        if not self._versions:
            first = initial_label_set()
            self._versions[first.version] = first
            self._append_line(first)

    @property
    def current(self) -> LabelSet:
        return self._versions[max(self._versions)]

    def get(self, version: int) -> LabelSet:
        return self._versions[version]

    def versions(self) -> list[LabelSet]:
        return [self._versions[v] for v in sorted(self._versions)]

    def extend(self, new_labels: Iterable[GenderLabel]) -> LabelSet:
        with self._lock:
            nxt = extend(self.current, new_labels)
            self._versions[nxt.version] = nxt
            self._append_line(nxt)
            return nxt

    def _append_line(self, label_set: LabelSet) -> None:
        if self._path is None:
            return
        self._path.parent.mkdir(parents=True, exist_ok=True)
        line = f"{label_set.version}\t{','.join(l.name for l in label_set.labels)}\n"
        with self._path.open("a", encoding="utf-8") as fh:
            fh.write(line)
