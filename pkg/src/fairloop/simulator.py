"""Synthetic population streams and feedback behavior for full-loop runs.

Groups are isotropic Gaussian feature clouds. For groups whose true label
the reference model covers, the cloud center is placed along the axis
between the two model centroids at a distance solved numerically
(bisection) so the model's expected accuracy on the group hits the
configured base rate; the per-group rate under a two-centroid model is an
exact normal CDF, so placement error is dominated by sampling noise.
Groups with out-of-model truths (e.g. a separable non-binary cluster, or
a vocabulary the system does not know yet) are placed explicitly.

Scenario runs drive the whole loop deterministically under a seed:
classify, open a session, simulate the user's feedback and consent, feed
the consent store and the update scheduler, and snapshot utility per
epoch (one epoch = one evaluation interval of resolutions).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import (
    DEFAULT_DIM,
    EvaluationReport,
    FaceRecord,
    GroupStats,
    ModelArtifact,
    Prediction,
    classify,
    evaluate,
    preprocess,
    train,
)
from .consent import ConsentStore
from .labels import UNCLASSIFIABLE, GenderLabel, LabelSet, _UnclassifiableType, initial_label_set
from .scheduler import ModelRegistry, UnknownLabelLog, UpdateDecision, UpdatePolicy, UpdateScheduler
from .sessions import DECLINE_TOKEN, ManualClock, Provenance, SessionStore
from .utility import MetricsTracker, UtilitySnapshot, incompleteness_at, make_snapshot

#: Geometry of the binary training corpus: two clusters at +/- separation
#: along axis 0, unit spread, equal sizes.
TRAIN_SEPARATION = 3.0
TRAIN_SPREAD = 1.0
TRAIN_PER_CLASS = 1000

#: Simulated duration of one classification, seconds.
CLASSIFY_SECONDS = 0.05


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    """One population group of the mixture.

    ``base_rate`` is the target accuracy of the reference model on this
    group (its TPR); calibration resolves it into a ``center``. Groups
    may instead fix ``center`` directly. ``truth`` may be any label --
    including one outside the system's current vocabulary -- or the
    unclassifiable sentinel for people who will decline.
    """

    tag: str
    weight: float
    truth: GenderLabel | _UnclassifiableType
    base_rate: float | None = None
    center: tuple[float, ...] | None = None
    spread: float = 1.0

    def __post_init__(self) -> None:
        if self.base_rate is not None and not 0 <= self.base_rate <= 1:
            raise InvalidSpec(f"base rate must be in [0,1]: {self.base_rate}")
        if self.spread <= 0:
            raise InvalidSpec("spread must be positive")
        if self.base_rate is None and self.center is None:
            raise InvalidSpec(f"group {self.tag} needs a base_rate or an explicit center")


@dataclass(frozen=True)
class PopulationSpec:
    groups: tuple[GroupSpec, ...]
    seed: int
    dim: int = DEFAULT_DIM

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if not self.groups:
            raise InvalidSpec("spec needs at least one group")
        total = sum(g.weight for g in self.groups)
        if abs(total - 1.0) > 1e-9:
            raise InvalidSpec(f"group weights must sum to 1, got {total}")
        if len({g.tag for g in self.groups}) != len(self.groups):
            raise InvalidSpec("group tags must be distinct")


@dataclass(frozen=True)
class FeedbackBehavior:
    """How simulated users act within the feedback window.

    ``participation`` is the chance a misgendered user corrects before
    the deadline; ``confirm_rate`` the chance a correctly-labeled user
    actively confirms rather than staying silent; ``adversarial_rate``
    the chance a user deliberately submits a wrong label. Adversarial
    feedback still resolves the session -- outputs are advisory-only, so
    the system quantifies manipulation rather than policing it.
    """

    participation: float = 0.0
    confirm_rate: float = 0.0
    consent_rate: float = 0.0
    adversarial_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("participation", "confirm_rate", "consent_rate", "adversarial_rate"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidSpec(f"{name} must be in [0,1]: {value}")


def make_training_data(
    dim: int = DEFAULT_DIM,
    seed: int = 0,
    n_per_class: int = TRAIN_PER_CLASS,
    separation: float = TRAIN_SEPARATION,
    spread: float = TRAIN_SPREAD,
) -> list[tuple[FaceRecord, str]]:
    """Binary source-labeled corpus: two separable Gaussian clusters."""
    rng = np.random.default_rng(seed)
    data = []
    for source, sign in (("male", 1.0), ("female", -1.0)):
        center = np.zeros(dim)
        center[0] = sign * separation
        for i in range(n_per_class):
            raw = center + spread * rng.standard_normal(dim)
            data.append((FaceRecord(id=f"train-{source}-{i}", raw=raw), source))
    return data


def make_reference_model(
    label_set: LabelSet,
    dim: int = DEFAULT_DIM,
    seed: int = 0,
) -> tuple[ModelArtifact, list[tuple[np.ndarray, GenderLabel]]]:
    """Train the binary reference model; also return its corpus as labeled rows."""
    data = make_training_data(dim=dim, seed=seed)
    model = train(data, label_set)
    from .classifier import SOURCE_TO_LABEL

    base = [(rec.raw, SOURCE_TO_LABEL[src]) for rec, src in data]
    return model, base


def _normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def expected_group_rate(center: np.ndarray, spread: float, model: ModelArtifact, truth: GenderLabel) -> float:
    """Exact P(model assigns ``truth``) for an isotropic cloud, two-centroid models."""
    others = [l for l in model.centroids if l != truth]
    if truth not in model.centroids or len(others) != 1:
        raise InvalidSpec("analytic rate needs a model covering the truth label and one other")
    a = model.centroids[truth]
    b = model.centroids[others[0]]
    stats = model.training_stats
    w = a - b
    z_mean = (center - stats.mean) / stats.scale
    margin = float(w @ z_mean - w @ (a + b) / 2.0)
    variance = float(np.sum((w * spread / stats.scale) ** 2))
    return _normal_cdf(margin / math.sqrt(variance))


def _solve_center(group: GroupSpec, model: ModelArtifact, dim: int) -> np.ndarray:
    """Bisection on placement distance along the inter-centroid axis."""
    truth = group.truth
    assert isinstance(truth, GenderLabel) and group.base_rate is not None
    others = [l for l in model.centroids if l != truth]
    stats = model.training_stats
    raw_truth = model.centroids[truth] * stats.scale + stats.mean
    raw_other = model.centroids[others[0]] * stats.scale + stats.mean
    axis = raw_truth - raw_other
    axis = axis / np.linalg.norm(axis)
    mid = (raw_truth + raw_other) / 2.0

    # Rates of exactly 0 or 1 have no finite placement; land just inside.
    target = min(max(group.base_rate, 1e-9), 1.0 - 1e-9)

    def rate(s: float) -> float:
        return expected_group_rate(mid + s * axis, group.spread, model, truth)

    lo, hi = -1.0, 1.0
    while rate(lo) > target:
        lo *= 2.0
    while rate(hi) < target:
        hi *= 2.0
    for _ in range(200):
        s = 0.5 * (lo + hi)
        if rate(s) < target:
            lo = s
        else:
            hi = s
    return mid + 0.5 * (lo + hi) * axis


def calibrate(spec: PopulationSpec, model: ModelArtifact) -> PopulationSpec:
    """Resolve every base_rate group into an explicit cloud center."""
    groups = []
    for group in spec.groups:
        if group.center is not None:
            groups.append(group)
            continue
        if not isinstance(group.truth, GenderLabel) or group.truth not in model.centroids:
            raise InvalidSpec(
                f"group {group.tag}: rate calibration needs a truth label the model covers"
            )
        center = _solve_center(group, model, spec.dim)
        groups.append(dataclasses.replace(group, center=tuple(float(x) for x in center)))
    return dataclasses.replace(spec, groups=tuple(groups))


def generate_stream(spec: PopulationSpec, n: int, id_prefix: str = "rec") -> list[FaceRecord]:
    """Draw ``n`` records by seeded mixture sampling. Centers must be resolved."""
    if n <= 0:
        raise InvalidSpec("stream size must be positive")
    for group in spec.groups:
        if group.center is None:
            raise InvalidSpec(f"group {group.tag} has no center; calibrate the spec first")
        if len(group.center) != spec.dim:
            raise InvalidSpec(f"group {group.tag} center dimension != {spec.dim}")
    rng = np.random.default_rng(spec.seed)
    weights = np.array([g.weight for g in spec.groups])
    weights = weights / weights.sum()
    picks = rng.choice(len(spec.groups), size=n, p=weights)
    records = []
    for i, pick in enumerate(picks):
        group = spec.groups[pick]
        raw = np.asarray(group.center) + group.spread * rng.standard_normal(spec.dim)
        records.append(
            FaceRecord(
                id=f"{id_prefix}-{i:06d}",
                raw=raw,
                region_present=True,
                truth=group.truth,
                group=group.tag,
            )
        )
    return records


def table2_spec(seed: int = 0, dim: int = DEFAULT_DIM) -> PopulationSpec:
    """Four-group scenario matching published per-group TPR averages."""
    man, woman = GenderLabel("man"), GenderLabel("woman")
    return PopulationSpec(
        groups=(
            GroupSpec("woman", 0.25, woman, base_rate=0.983),
            GroupSpec("man", 0.25, man, base_rate=0.976),
            GroupSpec("transwoman", 0.25, woman, base_rate=0.873),
            GroupSpec("transman", 0.25, man, base_rate=0.705),
        ),
        seed=seed,
        dim=dim,
    )


def error_gap_spec(seed: int = 0, dim: int = DEFAULT_DIM) -> PopulationSpec:
    """Two-group scenario with error rates 34.7% vs 0.8% (gap ~33.9pp)."""
    man, woman = GenderLabel("man"), GenderLabel("woman")
    return PopulationSpec(
        groups=(
            GroupSpec("most-misclassified", 0.5, woman, base_rate=1 - 0.347),
            GroupSpec("least-misclassified", 0.5, man, base_rate=1 - 0.008),
        ),
        seed=seed,
        dim=dim,
    )


def report_from_outcomes(outcomes: Sequence[tuple[str, object, GenderLabel]]) -> EvaluationReport:
    """Build an evaluation report from (group, truth, predicted) triples."""
    group_stats: dict[str, GroupStats] = {}
    label_stats: dict[GenderLabel, GroupStats] = {}
    confusion: dict[tuple[str, str], int] = {}
    total = correct = 0
    for group, truth, predicted in outcomes:
        if truth is UNCLASSIFIABLE:
            continue
        assert isinstance(truth, GenderLabel)
        hit = predicted == truth
        total += 1
        correct += int(hit)
        gs = group_stats.setdefault(group, GroupStats())
        gs.total += 1
        gs.correct += int(hit)
        ls = label_stats.setdefault(truth, GroupStats())
        ls.total += 1
        ls.correct += int(hit)
        key = (truth.name, predicted.name)
        confusion[key] = confusion.get(key, 0) + 1
    return EvaluationReport(group_stats, label_stats, confusion, total, correct)


@dataclass
class EpochResult:
    epoch: int
    classifier_report: EvaluationReport
    session_report: EvaluationReport
    holdout_report: EvaluationReport
    decision: UpdateDecision
    snapshot: UtilitySnapshot

    @property
    def classifier_accuracy(self) -> float:
        return self.classifier_report.accuracy

    @property
    def session_accuracy(self) -> float:
        return self.session_report.accuracy


@dataclass
class ScenarioReport:
    epochs: list[EpochResult]
    audit: list[dict]
    label_set: LabelSet
    final_model_version: int

    def session_accuracies(self) -> list[float]:
        return [e.session_accuracy for e in self.epochs]

    def utility_series(self) -> list[UtilitySnapshot]:
        return [e.snapshot for e in self.epochs]

    def write_outputs(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["epoch,group,total,correct,tpr"]
        for e in self.epochs:
            for group in sorted(e.classifier_report.group_stats):
                s = e.classifier_report.group_stats[group]
                lines.append(f"{e.epoch},{group},{s.total},{s.correct},{s.tpr:.6f}")
        (out / "tpr_by_group.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        tracker = MetricsTracker()
        tracker.snapshots = self.utility_series()
        tracker.to_csv(out / "utility.csv")
        with (out / "sessions.jsonl").open("w", encoding="utf-8") as fh:
            for entry in self.audit:
                fh.write(json.dumps(entry) + "\n")


def run_scenario(
    spec: PopulationSpec,
    behavior: FeedbackBehavior,
    policy: UpdatePolicy,
    epochs: int,
    t1: float = 5.0,
    label_set: LabelSet | None = None,
    holdout_size: int = 1000,
    consent_path: str | Path | None = None,
    audit_path: str | Path | None = None,
) -> ScenarioReport:
    """Drive classify -> session -> feedback -> consent -> update for each epoch.

    Deterministic for fixed (spec, behavior, policy, epochs): all
    randomness flows from the spec seed, session ids are sequential, and
    time is a logical clock. Each record consumes a fixed block of
    behavior draws so runs with different behavior parameters stay
    coupled record-by-record.
    """
    if epochs <= 0:
        raise InvalidSpec("epochs must be positive")
    label_set = label_set if label_set is not None else initial_label_set()

    model, base_data = make_reference_model(label_set, dim=spec.dim, seed=spec.seed)
    spec = calibrate(spec, model)
    registry = ModelRegistry(model)

    holdout = generate_stream(
        dataclasses.replace(spec, seed=spec.seed + 7919), holdout_size, id_prefix="holdout"
    )

    clock = ManualClock()
    counter = iter(range(10**9))
    store = SessionStore(
        clock=clock,
        audit_path=audit_path,
        id_factory=lambda: f"s-{next(counter):08d}",
    )
    consent = ConsentStore(path=consent_path, clock=clock)
    unknown_log = UnknownLabelLog()
    scheduler = UpdateScheduler(policy, registry, consent, base_data, holdout, unknown_log)

    behavior_rng = np.random.default_rng(spec.seed + 104729)
    epoch_results: list[EpochResult] = []

    for epoch in range(epochs):
        stream = generate_stream(
            dataclasses.replace(spec, seed=spec.seed + 1000 + epoch),
            policy.evaluation_interval,
            id_prefix=f"e{epoch}",
        )
        outcomes_classifier: list[tuple[str, object, GenderLabel]] = []
        outcomes_session: list[tuple[str, object, GenderLabel]] = []
        window: list[object] = []

        for rec in stream:
            # Fixed draw block per record (common random numbers).
            u_adv, u_act, u_delay, u_consent, u_label = behavior_rng.random(5)

            classified_at = clock()
            clock.advance(CLASSIFY_SECONDS)
            current = registry.current
            pred = classify(rec, current, label_set)
            features = preprocess(rec, current.training_stats)
            session = store.open_session(
                pred, rec.id, t1, label_set, classified_at=classified_at
            )

            raw_feedback = _choose_feedback(
                rec, pred, behavior, label_set, u_adv, u_act, u_label
            )
            if raw_feedback is None:
                clock.set(session.deadline)
                store.expire(session.session_id)
                consented = False
            else:
                clock.set(session.opened_at + (0.05 + 0.9 * u_delay) * t1)
                final, accepted = store.resolve_feedback(session.session_id, raw_feedback)
                if accepted and final.provenance is Provenance.INVALID_FALLBACK:
                    unknown_log.log_unknown_label(raw_feedback, clock())
                consented = u_consent < behavior.consent_rate
            consent.record(session, features, consented)

            final = session.resolution
            assert final is not None
            if final.provenance is Provenance.INVALID_FALLBACK:
                window.append(raw_feedback)
            elif final.provenance is Provenance.USER_DECLINED:
                window.append(UNCLASSIFIABLE)
            else:
                window.append(final.label)

            outcomes_classifier.append((rec.group, rec.truth, pred.label))
            if final.provenance is not Provenance.USER_DECLINED and isinstance(final.label, GenderLabel):
                outcomes_session.append((rec.group, rec.truth, final.label))
            cycle_due = scheduler.note_resolution()

        assert cycle_due  # one epoch is exactly one evaluation interval
        decision = scheduler.run_cycle(label_set)
        gated_holdout = [
            r for r in holdout if r.truth is not UNCLASSIFIABLE and r.truth in label_set
        ]
        holdout_report = evaluate(registry.current, gated_holdout, label_set)
        snapshot = make_snapshot(
            t=epoch,
            accuracy=holdout_report.accuracy,
            incompleteness=incompleteness_at(window, label_set),
        )
        epoch_results.append(
            EpochResult(
                epoch=epoch,
                classifier_report=report_from_outcomes(outcomes_classifier),
                session_report=report_from_outcomes(outcomes_session),
                holdout_report=holdout_report,
                decision=decision,
                snapshot=snapshot,
            )
        )

    return ScenarioReport(
        epochs=epoch_results,
        audit=list(store.audit),
        label_set=label_set,
        final_model_version=registry.current.model_version,
    )


def _choose_feedback(
    rec: FaceRecord,
    pred: Prediction,
    behavior: FeedbackBehavior,
    label_set: LabelSet,
    u_adv: float,
    u_act: float,
    u_label: float,
) -> str | None:
    """What this user types, or None for silence."""
    if u_adv < behavior.adversarial_rate:
        wrong = [l for l in label_set.labels if l != rec.truth]
        return wrong[int(u_label * len(wrong)) % len(wrong)].name
    if rec.truth is UNCLASSIFIABLE:
        return DECLINE_TOKEN if u_act < behavior.participation else None
    if pred.label == rec.truth:
        return "" if u_act < behavior.confirm_rate else None
    if u_act < behavior.participation:
        assert isinstance(rec.truth, GenderLabel)
        return rec.truth.name
    return None


def spec_to_json(spec: PopulationSpec) -> dict:
    groups = []
    for g in spec.groups:
        obj: dict = {
            "tag": g.tag,
            "weight": g.weight,
            "truth": None if g.truth is UNCLASSIFIABLE else g.truth.name,
            "spread": g.spread,
        }
        if g.base_rate is not None:
            obj["base_rate"] = g.base_rate
        if g.center is not None:
            obj["center"] = list(g.center)
        groups.append(obj)
    return {"seed": spec.seed, "dim": spec.dim, "groups": groups}


def spec_from_json(obj: dict) -> PopulationSpec:
    groups = []
    for g in obj["groups"]:
        truth = UNCLASSIFIABLE if g["truth"] is None else GenderLabel(g["truth"])
        groups.append(
            GroupSpec(
                tag=g["tag"],
                weight=float(g["weight"]),
                truth=truth,
                base_rate=g.get("base_rate"),
                center=tuple(g["center"]) if g.get("center") is not None else None,
                spread=float(g.get("spread", 1.0)),
            )
        )
    return PopulationSpec(
        groups=tuple(groups), seed=int(obj["seed"]), dim=int(obj.get("dim", DEFAULT_DIM))
    )


def load_spec(path: str | Path) -> PopulationSpec:
    return spec_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_behavior(path: str | Path) -> FeedbackBehavior:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return FeedbackBehavior(
        participation=float(obj.get("participation", 0.0)),
        confirm_rate=float(obj.get("confirm_rate", 0.0)),
        consent_rate=float(obj.get("consent_rate", 0.0)),
        adversarial_rate=float(obj.get("adversarial_rate", 0.0)),
    )
