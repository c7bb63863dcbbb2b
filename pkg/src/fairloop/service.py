"""HTTP surface for the feedback loop.

Every classification response is advisory-only by contract, and no
endpoint exists whose response grants or denies anything: the absence of
a gating capability is structural, not documentation. Timeouts are
server-authoritative -- the response carries the server deadline, a
background sweeper fires expiries, and late feedback gets the standing
resolution back with a ``late`` flag rather than an error.
"""

from __future__ import annotations

import csv
import time
import uuid
from contextlib import asynccontextmanager
from typing import Literal

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import classifier
from .classifier import FaceRecord, ModelUnavailable, NoFaceDetected, load_model
from .config import ServiceConfig
from .consent import ConsentStore
from .labels import UNCLASSIFIABLE, DuplicateLabel, EmptyExtension, GenderLabel, LabelRegistry
from .scheduler import ModelRegistry, UnknownLabelLog
from .sessions import ExpirySweeper, Provenance, SessionStore, UnknownSession
from .utility import read_series

MODEL_FILE = "model.txt"
LABELS_FILE = "labels.tsv"
SESSIONS_FILE = "sessions.jsonl"
TRAINING_FILE = "training.jsonl"
UNKNOWN_FILE = "unknown_labels.jsonl"
UTILITY_FILE = "utility.csv"
TPR_FILE = "tpr_by_group.csv"


class ClassifyRequest(BaseModel):
    raw: list[float]
    id: str | None = None
    region_present: bool = True


class ClassifyResponse(BaseModel):
    session_id: str
    record_id: str
    predicted: str
    scores: dict[str, float]
    t1_seconds: float
    deadline: float
    usage: Literal["advisory-only"] = "advisory-only"
    label_set_version: int


class FeedbackRequest(BaseModel):
    label: str | None = ""
    consent: bool = False


class FeedbackResponse(BaseModel):
    session_id: str
    final: str | None
    provenance: str
    resolved_at: float
    late: bool
    stored: bool


class ExtendRequest(BaseModel):
    labels: list[str]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config if config is not None else ServiceConfig()
    data_dir = config.data_dir
    data_dir.mkdir(parents=True, exist_ok=True)

    registry = LabelRegistry(data_dir / LABELS_FILE)
    model_registry = ModelRegistry()
    model_path = data_dir / MODEL_FILE
    if model_path.exists():
        model_registry.register(load_model(model_path))
    sessions = SessionStore(clock=time.time, audit_path=data_dir / SESSIONS_FILE)
    consent = ConsentStore(path=data_dir / TRAINING_FILE)
    unknown_log = UnknownLabelLog(path=data_dir / UNKNOWN_FILE)
    sweeper = ExpirySweeper(sessions, tick=config.sweep_tick)
    features_by_session: dict[str, classifier.FeatureVector] = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        sweeper.start()
        yield
        sweeper.stop()

    app = FastAPI(title="fairloop", lifespan=lifespan)
    # The browser console may be served from any origin; responses carry no
    # credentials and grant nothing, so a wide-open CORS policy is safe.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.config = config
    app.state.labels = registry
    app.state.models = model_registry
    app.state.sessions = sessions
    app.state.consent = consent
    app.state.unknown_log = unknown_log

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        # 422 is reserved for "no face detected"; malformed bodies are 400.
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.post("/classify", response_model=ClassifyResponse)
    def classify_record(body: ClassifyRequest) -> ClassifyResponse:
        classified_at = time.time()
        label_set = registry.current
        record = FaceRecord(
            id=body.id or f"rec-{uuid.uuid4().hex}",
            raw=body.raw,
            region_present=body.region_present,
        )
        model = model_registry.current
        try:
            prediction = classifier.classify(record, model, label_set)
        except NoFaceDetected:
            raise HTTPException(status_code=422, detail="no face detected")
        except ModelUnavailable:
            raise HTTPException(status_code=503, detail="no model registered")
        session = sessions.open_session(
            prediction,
            record.id,
            config.t1_seconds,
            label_set,
            classified_at=classified_at,
        )
        features_by_session[session.session_id] = classifier.preprocess(
            record, model.training_stats
        )
        return ClassifyResponse(
            session_id=session.session_id,
            record_id=record.id,
            predicted=prediction.label.name,
            scores={l.name: s for l, s in prediction.scores.items()},
            t1_seconds=session.t1,
            deadline=session.deadline,
            label_set_version=session.label_set_version,
        )

    @app.post("/sessions/{session_id}/feedback", response_model=FeedbackResponse)
    def feedback(session_id: str, body: FeedbackRequest) -> FeedbackResponse:
        try:
            final, accepted = sessions.resolve_feedback(session_id, body.label)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")
        session = sessions.get(session_id)
        stored = False
        if accepted:
            if final.provenance is Provenance.INVALID_FALLBACK and body.label:
                unknown_log.log_unknown_label(body.label, final.resolved_at)
            features = features_by_session.pop(session_id, None)
            if features is not None:
                stored = consent.record(session, features, body.consent)
        return FeedbackResponse(
            session_id=session_id,
            final=None if final.label is UNCLASSIFIABLE else final.label.name,
            provenance=final.provenance.value,
            resolved_at=final.resolved_at,
            late=not accepted,
            stored=stored,
        )

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str):
        """Read-only resolution state, for clients polling the countdown."""
        try:
            session = sessions.get(session_id)
        except UnknownSession:
            raise HTTPException(status_code=404, detail="unknown session")
        body = {
            "session_id": session.session_id,
            "record_id": session.record_id,
            "predicted": session.predicted.label.name,
            "t1_seconds": session.t1,
            "deadline": session.deadline,
            "label_set_version": session.label_set_version,
            "status": session.state.value,
        }
        if session.resolution is not None:
            final = session.resolution
            body["final"] = None if final.label is UNCLASSIFIABLE else final.label.name
            body["provenance"] = final.provenance.value
            body["resolved_at"] = final.resolved_at
        return body

    @app.get("/labels")
    def get_labels():
        current = registry.current
        return {"version": current.version, "labels": [l.name for l in current.labels]}

    @app.post("/labels")
    def extend_labels(body: ExtendRequest, x_admin_token: str | None = Header(default=None)):
        if x_admin_token != config.admin_token:
            raise HTTPException(status_code=401, detail="admin token required")
        try:
            new = [GenderLabel(name) for name in body.labels]
            extended = registry.extend(new)
        except DuplicateLabel as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (EmptyExtension, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"version": extended.version, "labels": [l.name for l in extended.labels]}

    @app.delete("/records/{record_id}")
    def purge_record(record_id: str):
        return {"purged": consent.purge(record_id)}

    @app.get("/metrics")
    def metrics():
        series = []
        utility_path = data_dir / UTILITY_FILE
        if utility_path.exists():
            series = [
                {
                    "t": s.t,
                    "accuracy": s.accuracy,
                    "incompleteness": s.incompleteness,
                    "utility": s.utility,
                }
                for s in read_series(utility_path)
            ]
        tpr_by_group: dict[str, float] = {}
        tpr_history = []
        tpr_path = data_dir / TPR_FILE
        if tpr_path.exists():
            with tpr_path.open(encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    entry = {
                        "epoch": int(row["epoch"]),
                        "group": row["group"],
                        "total": int(row["total"]),
                        "correct": int(row["correct"]),
                        "tpr": float(row["tpr"]),
                    }
                    tpr_history.append(entry)
                    tpr_by_group[entry["group"]] = entry["tpr"]  # last epoch wins
        return {
            "series": series,
            "tpr_by_group": tpr_by_group,
            "tpr_history": tpr_history,
            "unknown_labels": dict(unknown_log.counts),
        }

    return app
