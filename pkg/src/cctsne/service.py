"""Stateful HTTP/JSON service for the visual-interactive labeling loop.

Each session owns a feature matrix, current class probabilities, user
labels, an incremental classifier, and one embedding. At most one
optimizer job runs per session; intermediate states are published as
frames for client-side animation. Sessions are flushed to disk as JSON on
shutdown and restored on startup.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

import numpy as np
from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import affinities, classifier, io_formats, optimizer
from .errors import CCTSNEError
from .types import ClassProbabilityMatrix, EmbeddingState, FeatureMatrix, Hyperparams

UNLABELED = -1


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class ServiceSettings:
    features: FeatureMatrix | None = None
    probabilities: ClassProbabilityMatrix | None = None
    true_labels: np.ndarray | None = None
    n_iter: int = 1000
    frame_every: int = 10
    state_dir: str = "cctsne_sessions"
    seed: int = 0
    perplexity: float = 30.0
    penalty_weight: float = 0.25
    learning_rate: float = 200.0
    train_epochs: int = 200


@dataclass
class Session:
    id: str
    features: FeatureMatrix
    probabilities: ClassProbabilityMatrix
    labels: np.ndarray                  # user-assigned; UNLABELED where none
    embedding: EmbeddingState
    p_pairwise: np.ndarray
    alpha: float = 0.0
    penalty_weight: float = 0.25
    seed: int = 0
    running: bool = False
    model: classifier.MlpModel | None = None
    frames: list = field(default_factory=list)
    next_frame: int = 0
    test_indices: np.ndarray | None = None  # fixed eval set when truth is preloaded
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def m(self) -> int:
        return self.probabilities.m

    def label_counts(self) -> list[int]:
        counts = np.zeros(self.m, dtype=np.int64)
        assigned = self.labels[self.labels != UNLABELED]
        for c in assigned:
            counts[c] += 1
        return counts.tolist()


def _uniform_probabilities(n: int, m: int, class_names=None) -> ClassProbabilityMatrix:
    return ClassProbabilityMatrix.validate(np.full((n, m), 1.0 / m), class_names)


def _state_dict(state: EmbeddingState) -> dict:
    return {
        "points": state.points.tolist(),
        "landmarks": state.landmarks.tolist(),
        "iteration": state.iteration,
    }


def build_app(settings: ServiceSettings) -> FastAPI:
    sessions: dict[str, Session] = {}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        _restore_sessions(sessions, settings)
        yield
        _flush_sessions(sessions, settings)

    app = FastAPI(lifespan=lifespan)

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"code": "invalid_request", "message": str(exc)})

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        return session

    def hyperparams(session: Session, n_iter: int | None = None) -> Hyperparams:
        return Hyperparams(
            alpha=session.alpha,
            penalty_weight=session.penalty_weight,
            perplexity=min(settings.perplexity, session.features.n - 1),
            n_iter=n_iter if n_iter is not None else settings.n_iter,
            learning_rate=settings.learning_rate,
            seed=session.seed,
        ).validated()

    def publish_frame(session: Session, state: EmbeddingState) -> None:
        session.frames.append(
            {"frame": session.next_frame, **_state_dict(state)}
        )
        session.next_frame += 1

    def run_job(session: Session) -> None:
        """Warm-started re-optimization; assumes the job slot was claimed."""
        try:
            with session.lock:
                # re-base iteration so frame iterations are monotone within the job
                init = EmbeddingState(
                    session.embedding.points.copy(), session.embedding.landmarks.copy()
                )
                h = hyperparams(session)
                p_class = affinities.class_affinities(session.probabilities)
                publish_frame(session, init)  # first frame: pre-call positions

            def callback(state: EmbeddingState) -> None:
                with session.lock:
                    session.embedding = state
                    if state.iteration % settings.frame_every == 0 or state.iteration == h.n_iter:
                        publish_frame(session, state)

            optimizer.run(session.p_pairwise, p_class, h, init=init, callback=callback)
        finally:
            with session.lock:
                session.running = False

    def claim_job(session: Session) -> None:
        if session.running:
            raise ApiError(409, "job_running", "an optimization job is already running")
        session.running = True

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/session")
    async def create_session(payload: dict = Body(default_factory=dict)):
        try:
            if "features_csv" in payload:
                features = io_formats.parse_features(str(payload["features_csv"]))
            elif settings.features is not None:
                features = settings.features
            else:
                raise ApiError(400, "missing_features", "no features payload and none preloaded")

            n = features.n
            class_names = payload.get("class_names")
            if "probabilities_csv" in payload:
                probs = io_formats.parse_probabilities(str(payload["probabilities_csv"]))
            elif settings.probabilities is not None and settings.probabilities.n == n:
                probs = settings.probabilities
            elif "n_classes" in payload:
                m = int(payload["n_classes"])
                if m < 2:
                    raise ApiError(400, "bad_class_count", f"n_classes must be >= 2, got {m}")
                probs = _uniform_probabilities(n, m, class_names)
            else:
                raise ApiError(
                    400,
                    "missing_probabilities",
                    "supply probabilities_csv, n_classes, or preload --probs",
                )
            if probs.n != n:
                raise ApiError(400, "dimension_mismatch",
                               f"features have {n} rows, probabilities {probs.n}")
        except CCTSNEError as exc:
            raise ApiError(400, "invalid_input", str(exc)) from None

        session_id = secrets.token_hex(16)
        p_pair, _ = affinities.joint_affinities(
            features, min(settings.perplexity, features.n - 1)
        )
        session = Session(
            id=session_id,
            features=features,
            probabilities=probs,
            labels=np.full(n, UNLABELED, dtype=np.int64),
            embedding=EmbeddingState(np.zeros((n, 2)), np.zeros((probs.m, 2))),
            p_pairwise=p_pair.values,
            alpha=0.0,
            penalty_weight=settings.penalty_weight,
            seed=settings.seed,
        )
        if settings.true_labels is not None and settings.features is features:
            _, test_idx = classifier.stratified_split(settings.true_labels, 1.0 / 3.0, settings.seed)
            session.test_indices = test_idx
        # cold-start embedding at alpha = 0 (untrained state)
        state, _ = optimizer.run(
            session.p_pairwise,
            affinities.class_affinities(probs),
            hyperparams(session),
        )
        session.embedding = state
        sessions[session_id] = session
        return {"id": session_id, "n": n, "m": probs.m, "alpha": session.alpha,
                "class_names": list(probs.class_names)}

    @app.get("/session/{session_id}")
    async def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            values = session.probabilities.values
            return {
                "points": session.embedding.points.tolist(),
                "landmarks": session.embedding.landmarks.tolist(),
                "alpha": session.alpha,
                "iteration": session.embedding.iteration,
                "running": session.running,
                "label_counts": session.label_counts(),
                "predicted": np.argmax(values, axis=1).tolist(),
                "probabilities_summary": values.max(axis=1).tolist(),
                "labels": session.labels.tolist(),
                "class_names": list(session.probabilities.class_names),
                "model_trained": session.model is not None,
            }

    @app.post("/session/{session_id}/alpha")
    async def set_alpha(session_id: str, payload: dict = Body(...)):
        session = get_session(session_id)
        if "alpha" not in payload:
            raise ApiError(422, "missing_alpha", "body must contain 'alpha'")
        try:
            alpha = float(payload["alpha"])
        except (TypeError, ValueError):
            raise ApiError(422, "bad_alpha", f"alpha must be a number, got {payload['alpha']!r}") from None
        if not 0.0 <= alpha <= 1.0:
            raise ApiError(422, "alpha_out_of_range", f"alpha must be in [0, 1], got {alpha}")
        with session.lock:
            claim_job(session)
            session.alpha = alpha
        thread = threading.Thread(target=run_job, args=(session,), daemon=True)
        thread.start()
        return {"status": "running", "alpha": alpha}

    @app.post("/session/{session_id}/labels")
    async def label_instances(session_id: str, payload: dict = Body(...)):
        session = get_session(session_id)
        indices = payload.get("indices")
        cls = payload.get("class")
        if not isinstance(indices, list) or cls is None:
            raise ApiError(422, "bad_request", "body must contain 'indices' list and 'class'")
        try:
            cls = int(cls)
            idx = [int(i) for i in indices]
        except (TypeError, ValueError):
            raise ApiError(422, "bad_request", "indices and class must be integers") from None
        n = session.features.n
        if not 0 <= cls < session.m:
            raise ApiError(422, "bad_class", f"class must be in [0, {session.m}), got {cls}")
        for i in idx:
            if not 0 <= i < n:
                raise ApiError(422, "bad_index", f"index {i} out of range for {n} instances")
        with session.lock:
            session.labels[idx] = cls
            counts = session.label_counts()
        return {"label_counts": counts}

    @app.post("/session/{session_id}/retrain")
    async def retrain(session_id: str):
        session = get_session(session_id)
        with session.lock:
            y = session.labels.copy()
            labeled = np.flatnonzero(y != UNLABELED)
            if np.unique(y[labeled]).size < 2:
                raise ApiError(422, "single_class", "need labeled instances from at least 2 classes")
            claim_job(session)
        try:
            X = session.features.values
            config = classifier.TrainConfig(epochs=settings.train_epochs, seed=session.seed)
            if session.test_indices is not None:
                train_idx = labeled
                eval_idx = session.test_indices
                eval_labels = settings.true_labels[eval_idx]
            else:
                # hold out a stratified third of the labeled instances
                rel_train, rel_eval = classifier.stratified_split(y[labeled], 1.0 / 3.0, session.seed)
                train_idx, eval_idx = labeled[rel_train], labeled[rel_eval]
                if np.unique(y[train_idx]).size < 2 or eval_idx.size == 0:
                    train_idx, eval_idx = labeled, labeled
                eval_labels = y[eval_idx]
            model = classifier.train(
                X[train_idx], y[train_idx], config, init=session.model, n_classes=session.m
            )
            test_accuracy = classifier.accuracy(model, X[eval_idx], eval_labels)
            new_alpha = classifier.alpha_for(test_accuracy)
            probs = classifier.predict_proba(model, X, class_names=session.probabilities.class_names)
            with session.lock:
                session.model = model
                session.probabilities = probs
                session.alpha = new_alpha
        except CCTSNEError as exc:
            with session.lock:
                session.running = False
            raise ApiError(422, "training_failed", str(exc)) from None
        except Exception:
            with session.lock:
                session.running = False
            raise
        thread = threading.Thread(target=run_job, args=(session,), daemon=True)
        thread.start()
        return {"test_accuracy": test_accuracy, "new_alpha": new_alpha}

    @app.get("/session/{session_id}/frames")
    async def frames(session_id: str, since: int = -1):
        session = get_session(session_id)
        with session.lock:
            fresh = [f for f in session.frames if f["frame"] > since]
            return {"frames": fresh, "running": session.running}

    return app


def _session_path(settings: ServiceSettings, session_id: str) -> str:
    return os.path.join(settings.state_dir, f"{session_id}.json")


def _flush_sessions(sessions: dict[str, Session], settings: ServiceSettings) -> None:
    if not sessions:
        return
    os.makedirs(settings.state_dir, exist_ok=True)
    for session in sessions.values():
        with session.lock:  # a job thread may still be publishing
            doc = {
                "id": session.id,
                "features": session.features.values.tolist(),
                "probabilities": session.probabilities.values.tolist(),
                "class_names": list(session.probabilities.class_names),
                "labels": session.labels.tolist(),
                "alpha": session.alpha,
                "penalty_weight": session.penalty_weight,
                "seed": session.seed,
                "embedding": _state_dict(session.embedding),
                "model": None
                if session.model is None
                else {
                    "w_hidden": session.model.w_hidden.tolist(),
                    "b_hidden": session.model.b_hidden.tolist(),
                    "w_out": session.model.w_out.tolist(),
                    "b_out": session.model.b_out.tolist(),
                },
            }
        with open(_session_path(settings, session.id), "w") as fh:
            json.dump(doc, fh)


def _restore_sessions(sessions: dict[str, Session], settings: ServiceSettings) -> None:
    if not os.path.isdir(settings.state_dir):
        return
    for name in sorted(os.listdir(settings.state_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(settings.state_dir, name)) as fh:
            doc = json.load(fh)
        features = FeatureMatrix.validate(np.asarray(doc["features"]))
        probs = ClassProbabilityMatrix.validate(
            np.asarray(doc["probabilities"]), doc.get("class_names")
        )
        p_pair, _ = affinities.joint_affinities(
            features, min(settings.perplexity, features.n - 1)
        )
        emb = doc["embedding"]
        model = None
        if doc.get("model") is not None:
            m = doc["model"]
            model = classifier.MlpModel(
                np.asarray(m["w_hidden"]), np.asarray(m["b_hidden"]),
                np.asarray(m["w_out"]), np.asarray(m["b_out"]),
            )
        session = Session(
            id=doc["id"],
            features=features,
            probabilities=probs,
            labels=np.asarray(doc["labels"], dtype=np.int64),
            embedding=EmbeddingState(
                np.asarray(emb["points"]), np.asarray(emb["landmarks"]),
                iteration=int(emb["iteration"]),
            ),
            p_pairwise=p_pair.values,
            alpha=float(doc["alpha"]),
            penalty_weight=float(doc["penalty_weight"]),
            seed=int(doc["seed"]),
            model=model,
        )
        # the fixed evaluation split is deterministic, so rebuild it
        if settings.true_labels is not None and settings.true_labels.shape[0] == features.n:
            _, test_idx = classifier.stratified_split(
                settings.true_labels, 1.0 / 3.0, settings.seed
            )
            session.test_indices = test_idx
        sessions[session.id] = session
