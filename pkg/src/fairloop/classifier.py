"""Four-stage classification pipeline over abstract feature-vector records.

Stages: detect -> preprocess -> extract -> classify. Records are numeric
vectors standing in for pre-detection image input; the baseline model is
nearest-centroid with softmax confidences, trained on binary-labeled data
(source tokens ``male``/``female`` relabeled to ``man``/``woman``). Labels
without training data get score exactly 0, so a binary-trained model can
never emit them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .labels import UNCLASSIFIABLE, GenderLabel, LabelSet, _UnclassifiableType

DEFAULT_DIM = 16

#: Source-label relabeling applied during training.
SOURCE_TO_LABEL = {"male": GenderLabel("man"), "female": GenderLabel("woman")}


class NoFaceDetected(Exception):
    """No face region in the input: classification must not proceed."""


class DimensionMismatch(ValueError):
    pass


class EmptyTrainingSet(ValueError):
    pass


class EmptyEvaluationSet(ValueError):
    pass


class ModelUnavailable(Exception):
    """No model has been registered (or none of its labels are usable)."""


def _vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FaceRecord:
    """An abstract datapoint standing in for a face image.

    ``truth`` and ``group`` are simulation-only fields; production
    payloads never carry them.
    """

    id: str
    raw: np.ndarray
    region_present: bool = True
    truth: GenderLabel | _UnclassifiableType | None = None
    group: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw", _vector(self.raw, "raw"))

    @property
    def dim(self) -> int:
        return self.raw.shape[0]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Standardized feature vector produced by preprocess/extract."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _vector(self.values, "values"))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class TrainingStats:
    """Per-dimension centering and scale used by preprocessing."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", _vector(self.mean, "mean"))
        object.__setattr__(self, "scale", _vector(self.scale, "scale"))
        if self.mean.shape != self.scale.shape:
            raise DimensionMismatch("mean and scale must have the same dimension")
        if not np.all(self.scale > 0):
            raise ValueError("scale entries must be strictly positive")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def argmax_label(scores: dict[GenderLabel, float]) -> GenderLabel:
    """Deterministic argmax: highest score, ties broken lexicographically."""
    return min(scores, key=lambda l: (-scores[l], l.name))


@dataclass(frozen=True, eq=False)
class Prediction:
    label: GenderLabel
    scores: dict[GenderLabel, float]

    def __post_init__(self) -> None:
        total = sum(self.scores.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"scores must sum to 1 (got {total!r})")
        if self.label != argmax_label(self.scores):
            raise ValueError("label must be the deterministic argmax of scores")


@dataclass(frozen=True, eq=False)
class ModelArtifact:
    """Immutable trained model: per-label centroids plus training stats."""

    model_version: int
    centroids: dict[GenderLabel, np.ndarray]
    training_stats: TrainingStats
    trained_on: dict[GenderLabel, int]

    def __post_init__(self) -> None:
        if self.model_version < 1:
            raise ValueError("model_version must be >= 1")
        fixed = {}
        for label, centroid in self.centroids.items():
            vec = _vector(centroid, f"centroid[{label}]")
            if vec.shape[0] != self.training_stats.dim:
                raise DimensionMismatch("centroid dimension differs from training stats")
            fixed[label] = vec
        object.__setattr__(self, "centroids", fixed)

    @property
    def dim(self) -> int:
        return self.training_stats.dim


def detect(rec: FaceRecord) -> FaceRecord:
    """Pass the record through when a face region is present."""
    if not rec.region_present:
        raise NoFaceDetected(f"no face region in record {rec.id}")
    return rec


def preprocess(rec: FaceRecord, stats: TrainingStats) -> FeatureVector:
    if rec.dim != stats.dim:
        raise DimensionMismatch(
            f"record dimension {rec.dim} != training dimension {stats.dim}"
        )
    return FeatureVector((rec.raw - stats.mean) / stats.scale)


def extract_features(v: FeatureVector, mask: Sequence[int] | None = None) -> FeatureVector:
    """Feature-selection stage; identity unless a dimension mask is configured."""
    if mask is None:
        return v
    return FeatureVector(v.values[list(mask)])


def train_labeled(
    data: Iterable[tuple[np.ndarray, GenderLabel]],
    label_set: LabelSet,
    model_version: int = 1,
    stats: TrainingStats | None = None,
) -> ModelArtifact:
    """Train a nearest-centroid model from raw vectors with final labels.

    Training stats (per-dimension mean and population std, zero std
    replaced by 1) come from the whole dataset unless ``stats`` pins
    them; retraining passes the deployed stats so preprocessing stays
    stable across model versions and stored feature vectors remain
    interpretable. Centroids are means of the standardized vectors per
    label; labels with no datapoints get no centroid and can never be
    predicted.
    """
    rows = [(np.asarray(raw, dtype=np.float64), label) for raw, label in data]
    if not rows:
        raise EmptyTrainingSet("training data is empty")
    for _, label in rows:
        if label not in label_set:
            raise ValueError(f"training label not in label set: {label.name}")
    stacked = np.stack([raw for raw, _ in rows])
    if stats is None:
        mean = stacked.mean(axis=0)
        scale = stacked.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)  # constant dimensions stay usable
        stats = TrainingStats(mean, scale)

    standardized = (stacked - stats.mean) / stats.scale
    centroids: dict[GenderLabel, np.ndarray] = {}
    counts: dict[GenderLabel, int] = {}
    for label in {label for _, label in rows}:
        idx = [i for i, (_, l) in enumerate(rows) if l == label]
        centroids[label] = standardized[idx].mean(axis=0)
        counts[label] = len(idx)
    return ModelArtifact(model_version, centroids, stats, counts)


def train(
    data: Iterable[tuple[FaceRecord, str]],
    label_set: LabelSet,
    model_version: int = 1,
) -> ModelArtifact:
    """Train on binary source-labeled records (``male``/``female``).

    Source labels are relabeled (male -> man, female -> woman) before
    training, so the resulting model covers exactly those two labels.
    """
    relabeled = []
    for rec, source in data:
        target = SOURCE_TO_LABEL.get(source)
        if target is None:
            raise ValueError(f"source label must be 'male' or 'female': {source!r}")
        relabeled.append((rec.raw, target))
    if not relabeled:
        raise EmptyTrainingSet("training data is empty")
    return train_labeled(relabeled, label_set, model_version=model_version)


def classify(
    rec: FaceRecord,
    model: ModelArtifact | None,
    label_set: LabelSet,
    mask: Sequence[int] | None = None,
) -> Prediction:
    """Run the full pipeline and score the record against the model.

    Scores are a softmax (temperature 1.0) over negative Euclidean
    distances to the centroids of labels present in both the model and
    the label set; uncovered labels score exactly 0. Deterministic for a
    fixed (record, model, set): the argmax tie-break is total.
    """
    if model is None:
        raise ModelUnavailable("no model registered")
    features = extract_features(preprocess(detect(rec), model.training_stats), mask)
    available = [l for l in label_set.labels if l in model.centroids]
    if not available:
        raise ModelUnavailable("model covers no label in the label set")
    centroids = np.stack([model.centroids[l] for l in available])
    if mask is not None:
        centroids = centroids[:, list(mask)]
    dists = np.linalg.norm(centroids - features.values, axis=1)
    logits = -dists
    logits -= logits.max()  # stable softmax
    weights = np.exp(logits)
    probs = weights / weights.sum()
    scores = {l: 0.0 for l in label_set.labels}
    for label, p in zip(available, probs):
        scores[label] = float(p)
    return Prediction(label=argmax_label(scores), scores=scores)


@dataclass
class GroupStats:
    total: int = 0
    correct: int = 0

    @property
    def tpr(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass
class EvaluationReport:
    """Per-group and per-label TPRs, confusion matrix, overall accuracy."""

    group_stats: dict[str, GroupStats]
    label_stats: dict[GenderLabel, GroupStats]
    confusion: dict[tuple[str, str], int]
    total: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def tpr_by_group(self) -> dict[str, float]:
        return {g: s.tpr for g, s in self.group_stats.items()}

    def tpr_by_label(self) -> dict[GenderLabel, float]:
        return {l: s.tpr for l, s in self.label_stats.items()}

    def to_csv(self, path: str | Path) -> None:
        lines = ["group,total,correct,tpr"]
        for group in sorted(self.group_stats):
            s = self.group_stats[group]
            lines.append(f"{group},{s.total},{s.correct},{s.tpr:.6f}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def evaluate(
    model: ModelArtifact,
    eval_set: Iterable[FaceRecord],
    label_set: LabelSet,
) -> EvaluationReport:
    """Score a labeled evaluation stream.

    Records whose truth is the unclassifiable sentinel are excluded from
    every denominator; all other records need both truth and group tags.
    """
    group_stats: dict[str, GroupStats] = {}
    label_stats: dict[GenderLabel, GroupStats] = {}
    confusion: dict[tuple[str, str], int] = {}
    total = correct = 0
    for rec in eval_set:
        if rec.truth is None or rec.group is None:
            raise ValueError(f"evaluation record {rec.id} lacks truth or group")
        if rec.truth is UNCLASSIFIABLE:
            continue
        pred = classify(rec, model, label_set)
        hit = pred.label == rec.truth
        total += 1
        correct += int(hit)
        gs = group_stats.setdefault(rec.group, GroupStats())
        gs.total += 1
        gs.correct += int(hit)
        ls = label_stats.setdefault(rec.truth, GroupStats())
        ls.total += 1
        ls.correct += int(hit)
        key = (rec.truth.name, pred.label.name)
        confusion[key] = confusion.get(key, 0) + 1
    if total == 0:
        raise EmptyEvaluationSet("no classifiable records to evaluate")
    return EvaluationReport(group_stats, label_stats, confusion, total, correct)


def save_model(model: ModelArtifact, path: str | Path) -> None:
    """Write the model as text: one header line, then one line per centroid."""
    counts = ";".join(f"{l.name}:{n}" for l, n in sorted(model.trained_on.items()))
    header = "\t".join(
        [
            f"model_version={model.model_version}",
            f"d={model.dim}",
            "mean=" + ",".join(repr(float(x)) for x in model.training_stats.mean),
            "scale=" + ",".join(repr(float(x)) for x in model.training_stats.scale),
            f"counts={counts}",
        ]
    )
    lines = [header]
    for label in sorted(model.centroids):
        lines.append(
            f"{label.name}\t" + ",".join(repr(float(x)) for x in model.centroids[label])
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ModelArtifact:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    fields = dict(item.split("=", 1) for item in lines[0].split("\t"))
    mean = np.array([float(x) for x in fields["mean"].split(",")])
    scale = np.array([float(x) for x in fields["scale"].split(",")])
    counts: dict[GenderLabel, int] = {}
    if fields.get("counts"):
        for item in fields["counts"].split(";"):
            name, _, n = item.partition(":")
            counts[GenderLabel(name)] = int(n)
    centroids: dict[GenderLabel, np.ndarray] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        name, _, values = line.partition("\t")
        centroids[GenderLabel(name)] = np.array([float(x) for x in values.split(",")])
    return ModelArtifact(
        model_version=int(fields["model_version"]),
        centroids=centroids,
        training_stats=TrainingStats(mean, scale),
        trained_on=counts,
    )
