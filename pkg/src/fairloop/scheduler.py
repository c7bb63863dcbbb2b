"""Controlled model updates: periodic evaluation, per-class gate, atomic swap.

Update cycles run at a fixed interval measured in resolution counts. Each
cycle trains a candidate on the base corpus plus the consented batch,
scores it per class on a holdout, and publishes it atomically only when
every evaluated class clears the accuracy threshold. A failed gate leaves
the current model untouched, so an applied update can never regress a
previously-gated class below the threshold on the same holdout.

Invalid feedback tokens are tallied here too: they are the raw signal a
human needs when deciding whether the label vocabulary should grow.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import (
    EmptyTrainingSet,
    FaceRecord,
    ModelArtifact,
    evaluate,
    train_labeled,
)
from .consent import ConsentStore
from .labels import UNCLASSIFIABLE, GenderLabel, LabelSet, _fold


class HoldoutMissing(ValueError):
    pass


@dataclass(frozen=True)
class UpdatePolicy:
    """Knobs for the controlled update; all surfaced in config."""

    evaluation_interval: int = 1000  # resolutions between cycles
    per_class_threshold: float = 0.8
    min_new_datapoints: int = 50  # per newly-covered label

    def __post_init__(self) -> None:
        if self.evaluation_interval <= 0:
            raise ValueError("evaluation_interval must be positive")
        if not 0 < self.per_class_threshold <= 1:
            raise ValueError("per_class_threshold must be in (0, 1]")


def load_policy(path: str | Path) -> UpdatePolicy:
    """Read an UpdatePolicy from a key=value text file."""
    values: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    kwargs = {}
    for key in ("interval", "evaluation_interval"):
        if key in values:
            kwargs["evaluation_interval"] = int(values[key])
    for key in ("theta", "per_class_threshold"):
        if key in values:
            kwargs["per_class_threshold"] = float(values[key])
    if "min_new_datapoints" in values:
        kwargs["min_new_datapoints"] = int(values["min_new_datapoints"])
    return UpdatePolicy(**kwargs)


@dataclass(frozen=True)
class UpdateDecision:
    cycle_index: int
    candidate_model_version: int
    per_class_accuracy: dict[GenderLabel, float]
    applied: bool
    reason: str
    candidate: ModelArtifact | None = None

    def __post_init__(self) -> None:
        if self.applied and not self.per_class_accuracy:
            raise ValueError("an applied decision must carry per-class accuracies")


def decisions_to_csv(decisions: Sequence[UpdateDecision], path: str | Path) -> None:
    lines = ["cycle,candidate_version,label,accuracy,applied,reason"]
    for d in decisions:
        if d.per_class_accuracy:
            for label in sorted(d.per_class_accuracy):
                acc = d.per_class_accuracy[label]
                lines.append(
                    f"{d.cycle_index},{d.candidate_model_version},{label.name},"
                    f"{acc:.6f},{str(d.applied).lower()},{d.reason}"
                )
        else:
            lines.append(
                f"{d.cycle_index},{d.candidate_model_version},-,,"
                f"{str(d.applied).lower()},{d.reason}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class ModelRegistry:
    """Single atomic publication point for the current model."""

    def __init__(self, model: ModelArtifact | None = None):
        self._lock = threading.Lock()
        self._model = model

    @property
    def current(self) -> ModelArtifact | None:
        return self._model

    def register(self, model: ModelArtifact) -> None:
        with self._lock:
            self._model = model


class UnknownLabelLog:
    """Frequency counters over invalid feedback tokens (folded before counting).

    Feeds the human policy decision on extending the label set; nothing
    here mutates the vocabulary automatically.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.counts: Counter[str] = Counter()
        self.events: list[tuple[float, str]] = []
        self._lock = threading.Lock()

    def log_unknown_label(self, raw: str, tick: float) -> None:
        token = _fold(raw)
        if not token:
            return  # blank is not invalid, never logged
        with self._lock:
            self.counts[token] += 1
            self.events.append((tick, token))
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"tick": tick, "token": token}) + "\n")

    def events_since(self, tick: float) -> list[tuple[float, str]]:
        with self._lock:
            return [e for e in self.events if e[0] >= tick]


def evaluate_cycle(
    policy: UpdatePolicy,
    store: ConsentStore,
    current: ModelArtifact,
    holdout: Sequence[FaceRecord],
    label_set: LabelSet,
    base_data: Sequence[tuple[np.ndarray, GenderLabel]],
    cycle_index: int = 0,
    registry: ModelRegistry | None = None,
) -> UpdateDecision:
    """Run one controlled-update cycle against the holdout.

    The candidate is trained on ``base_data`` plus the consented batch
    (features de-standardized with the current model's stats, which are
    the stats that produced them). The export gate requires
    ``min_new_datapoints`` consented points for every label the current
    model does not cover yet; the accuracy gate requires every class
    present in the holdout (and in the label set) to reach the threshold.
    Only then is the candidate registered, atomically.
    """
    if not holdout:
        raise HoldoutMissing("no holdout evaluation set")
    candidate_version = current.model_version + 1

    uncovered = [l for l in label_set.labels if l not in current.centroids]
    min_counts = {l: policy.min_new_datapoints for l in uncovered}
    batch = store.export_training_batch(min_counts)
    if not batch:
        reason = "export gate unmet" if min_counts else "no consented data"
        return UpdateDecision(cycle_index, candidate_version, {}, False, reason)

    # Stored features live in the deployed standardized space; the candidate
    # inherits the current stats so they de-standardize exactly.
    stats = current.training_stats
    consented = [(f.values * stats.scale + stats.mean, label) for f, label in batch]
    try:
        candidate = train_labeled(
            list(base_data) + consented,
            label_set,
            model_version=candidate_version,
            stats=stats,
        )
    except EmptyTrainingSet:
        return UpdateDecision(cycle_index, candidate_version, {}, False, "no training data")

    gated = [
        rec
        for rec in holdout
        if rec.truth is not UNCLASSIFIABLE and rec.truth in label_set
    ]
    if not gated:
        raise HoldoutMissing("holdout has no records with in-set truth labels")
    report = evaluate(candidate, gated, label_set)
    per_class = report.tpr_by_label()

    theta = policy.per_class_threshold
    failing = sorted((l for l, acc in per_class.items() if acc < theta), key=lambda l: l.name)
    if failing:
        worst = failing[0]
        reason = f"class {worst.name} below threshold ({per_class[worst]:.3f} < {theta})"
        return UpdateDecision(cycle_index, candidate_version, per_class, False, reason)

    if registry is not None:
        registry.register(candidate)
    return UpdateDecision(
        cycle_index, candidate_version, per_class, True, "all classes cleared threshold", candidate
    )


class UpdateScheduler:
    """Counts resolutions and runs an update cycle every policy interval."""

    def __init__(
        self,
        policy: UpdatePolicy,
        registry: ModelRegistry,
        store: ConsentStore,
        base_data: Sequence[tuple[np.ndarray, GenderLabel]],
        holdout: Sequence[FaceRecord] | None = None,
        unknown_log: UnknownLabelLog | None = None,
    ):
        self.policy = policy
        self.registry = registry
        self.store = store
        self.base_data = list(base_data)
        self.holdout = list(holdout) if holdout is not None else []
        self.unknown_log = unknown_log if unknown_log is not None else UnknownLabelLog()
        self.decisions: list[UpdateDecision] = []
        self._resolutions = 0
        self._lock = threading.Lock()

    def note_resolution(self) -> bool:
        """Record one resolution; True when an update cycle is now due."""
        with self._lock:
            self._resolutions += 1
            return self._resolutions % self.policy.evaluation_interval == 0

    def run_cycle(self, label_set: LabelSet) -> UpdateDecision:
        current = self.registry.current
        if current is None:
            raise HoldoutMissing("no current model to update from")
        decision = evaluate_cycle(
            self.policy,
            self.store,
            current,
            self.holdout,
            label_set,
            self.base_data,
            cycle_index=len(self.decisions),
            registry=self.registry,
        )
        self.decisions.append(decision)
        return decision
