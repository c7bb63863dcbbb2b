"""System utility over time: accuracy, label-set incompleteness, and their ratio.

Utility is modeled as U(t) = c * A(t) / L(t) with a fixed proportionality
constant c (default 1, configurable; only the scale of U depends on it,
never its ordering over time). A(t) is measured accuracy; L(t) is
operationalized as the fraction of observed intended labels that fall
outside the current label set -- declined records and invalid-feedback
unknown tokens -- floored at epsilon so U stays finite.

Measured accuracy can dip between updates even though it is modeled as
increasing; snapshots record what was measured, without smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .classifier import EvaluationReport
from .labels import GenderLabel, LabelSet

#: Floor for incompleteness; keeps U finite when everything is in-vocabulary.
EPSILON = 0.01

#: Default proportionality constant for U.
DEFAULT_C = 1.0

#: One intended-label observation: an in- or out-of-set label, the
#: unclassifiable sentinel, or a raw unknown token from invalid feedback.
Observation = object


class EmptyReport(ValueError):
    pass


class EmptyWindow(ValueError):
    pass


@dataclass(frozen=True)
class UtilitySnapshot:
    t: float
    accuracy: float
    incompleteness: float
    utility: float
    c: float = DEFAULT_C

    def __post_init__(self) -> None:
        if self.incompleteness < EPSILON:
            raise ValueError(f"incompleteness below floor {EPSILON}")
        expected = self.c * self.accuracy / self.incompleteness
        if abs(self.utility - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError("utility must equal c * accuracy / incompleteness")


def accuracy_at(report: EvaluationReport) -> float:
    """Overall correct/total over all non-declined records."""
    if report.total == 0:
        raise EmptyReport("evaluation report covers no records")
    return report.accuracy


def incompleteness_at(stream_window: Sequence[Observation], label_set: LabelSet) -> float:
    """Out-of-vocabulary fraction of the window, floored at epsilon.

    An observation counts as outside the label set when it is the
    unclassifiable sentinel (a declined record), a raw unknown-label
    token, or a label not in the current set.
    """
    window = list(stream_window)
    if not window:
        raise EmptyWindow("incompleteness needs a non-empty window")
    outside = 0
    for obs in window:
        if isinstance(obs, GenderLabel):
            outside += obs not in label_set
        else:
            outside += 1  # sentinel or unknown raw token
    return max(EPSILON, outside / len(window))


def utility_at(accuracy: float, incompleteness: float, c: float = DEFAULT_C) -> float:
    if incompleteness < EPSILON:
        raise ValueError(f"incompleteness must be >= {EPSILON}")
    return c * accuracy / incompleteness


def make_snapshot(t: float, accuracy: float, incompleteness: float, c: float = DEFAULT_C) -> UtilitySnapshot:
    return UtilitySnapshot(t, accuracy, incompleteness, utility_at(accuracy, incompleteness, c), c)


class MetricsTracker:
    """Accumulates utility snapshots and exports them as a CSV time series."""

    def __init__(self, c: float = DEFAULT_C):
        self.c = c
        self.snapshots: list[UtilitySnapshot] = []

    def observe(
        self,
        t: float,
        report: EvaluationReport,
        stream_window: Sequence[Observation],
        label_set: LabelSet,
    ) -> UtilitySnapshot:
        snap = make_snapshot(
            t, accuracy_at(report), incompleteness_at(stream_window, label_set), self.c
        )
        self.snapshots.append(snap)
        return snap

    def append(self, snap: UtilitySnapshot) -> None:
        self.snapshots.append(snap)

    def to_csv(self, path: str | Path) -> None:
        write_series(self.snapshots, path)


def write_series(snapshots: Iterable[UtilitySnapshot], path: str | Path) -> None:
    lines = ["t,accuracy,incompleteness,utility"]
    for s in snapshots:
        lines.append(f"{s.t:g},{s.accuracy!r},{s.incompleteness!r},{s.utility!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_series(path: str | Path) -> list[UtilitySnapshot]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        t, a, l, u = (float(x) for x in line.split(","))
        c = u * l / a if a else DEFAULT_C  # c is not a column; reconstruct it
        out.append(UtilitySnapshot(t, a, l, u, c))
    return out
