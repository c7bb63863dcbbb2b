"""Feedback-gated gender classification at desk scale.

The pipeline classifies abstract feature-vector records, but its output
is provisional: every prediction opens a feedback session the user can
confirm, correct, or decline within a timeout, after which it
auto-confirms. Resolved datapoints are retained for retraining only
under explicit opt-in consent; model updates are periodic and gated on
per-class holdout accuracy; system utility is tracked as the ratio of
accuracy to label-set incompleteness. A seeded simulator drives the
whole loop against configurable population groups and feedback behavior.
"""

from .classifier import (
    DEFAULT_DIM,
    EvaluationReport,
    FaceRecord,
    FeatureVector,
    ModelArtifact,
    ModelUnavailable,
    NoFaceDetected,
    Prediction,
    TrainingStats,
    classify,
    detect,
    evaluate,
    extract_features,
    preprocess,
    train,
    train_labeled,
)
from .consent import ConsentedDatapoint, ConsentStore
from .labels import (
    INITIAL_LABELS,
    UNCLASSIFIABLE,
    DuplicateLabel,
    EmptyExtension,
    FeedbackVerdict,
    GenderLabel,
    LabelRegistry,
    LabelSet,
    Verdict,
    extend,
    initial_label_set,
    validate_feedback,
)
from .scheduler import (
    ModelRegistry,
    UnknownLabelLog,
    UpdateDecision,
    UpdatePolicy,
    UpdateScheduler,
    evaluate_cycle,
)
from .sessions import (
    DECLINE_TOKEN,
    FeedbackSession,
    FinalLabel,
    ManualClock,
    Provenance,
    SessionState,
    SessionStore,
    UnknownSession,
    resolution_latency,
)
from .simulator import (
    FeedbackBehavior,
    GroupSpec,
    PopulationSpec,
    ScenarioReport,
    calibrate,
    generate_stream,
    make_reference_model,
    run_scenario,
    table2_spec,
)
from .utility import (
    EPSILON,
    MetricsTracker,
    UtilitySnapshot,
    accuracy_at,
    incompleteness_at,
    make_snapshot,
    utility_at,
)

__version__ = "0.1.0"
