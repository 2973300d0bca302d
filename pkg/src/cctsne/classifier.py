"""One-hidden-layer softmax MLP trained with mini-batch SGD.

Small on purpose: it supplies class probabilities for the synthetic
experiment and supports incremental updates during interactive labeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySet, SingleClassTrainingSet
from .types import ClassProbabilityMatrix

MODEL_FORMAT_VERSION = 1


@dataclass
class MlpModel:
    w_hidden: np.ndarray  # (d, h)
    b_hidden: np.ndarray  # (h,)
    w_out: np.ndarray     # (h, m)
    b_out: np.ndarray     # (m,)

    @property
    def n_features(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w_out.shape[1]

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.w_hidden.copy(), self.b_hidden.copy(), self.w_out.copy(), self.b_out.copy()
        )


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 64
    epochs: int = 200
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward(model: MlpModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.maximum(X @ model.w_hidden + model.b_hidden, 0.0)
    return hidden, _softmax(hidden @ model.w_out + model.b_out)


def init_model(n_features: int, n_classes: int, hidden: int, rng: np.random.Generator) -> MlpModel:
    scale1 = np.sqrt(2.0 / n_features)
    scale2 = np.sqrt(2.0 / hidden)
    return MlpModel(
        w_hidden=rng.normal(0.0, scale1, size=(n_features, hidden)),
        b_hidden=np.zeros(hidden),
        w_out=rng.normal(0.0, scale2, size=(hidden, n_classes)),
        b_out=np.zeros(n_classes),
    )


def train(
    X,
    labels,
    config: TrainConfig = TrainConfig(),
    init: MlpModel | None = None,
    n_classes: int | None = None,
) -> MlpModel:
    """Cross-entropy SGD; with `init` the parameters continue from the given model."""
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if np.unique(y).size < 2:
        raise SingleClassTrainingSet("training set must contain at least 2 classes")
    rng = np.random.default_rng(config.seed)
    if init is not None:
        model = init.copy()
        if model.n_features != X.shape[1]:
            raise DimensionMismatch(
                f"model expects {model.n_features} features, data has {X.shape[1]}"
            )
    else:
        m = n_classes if n_classes is not None else int(y.max()) + 1
        model = init_model(X.shape[1], m, config.hidden, rng)
    if y.max() >= model.n_classes:
        raise DimensionMismatch(f"label {y.max()} out of range for {model.n_classes} classes")

    n = X.shape[0]
    onehot = np.zeros((n, model.n_classes))
    onehot[np.arange(n), y] = 1.0
    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, tb = X[idx], onehot[idx]
            hidden, probs = _forward(model, xb)
            err = (probs - tb) / idx.size
            grad_w_out = hidden.T @ err
            grad_b_out = err.sum(axis=0)
            back = (err @ model.w_out.T) * (hidden > 0.0)
            model.w_out -= lr * grad_w_out
            model.b_out -= lr * grad_b_out
            model.w_hidden -= lr * (xb.T @ back)
            model.b_hidden -= lr * back.sum(axis=0)
    return model


def predict_proba(model: MlpModel, X, class_names=None) -> ClassProbabilityMatrix:
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, data has {X.shape[1]}"
        )
    _, probs = _forward(model, X)
    probs = probs / probs.sum(axis=1, keepdims=True)
    return ClassProbabilityMatrix.validate(probs, class_names)


def predict(model: MlpModel, X) -> np.ndarray:
    return np.argmax(predict_proba(model, X).values, axis=1)


def accuracy(model: MlpModel, X, labels) -> float:
    y = np.asarray(labels, dtype=np.int64)
    if y.size == 0:
        raise EmptySet("cannot score an empty set")
    return float(np.mean(predict(model, X) == y))


def alpha_for(test_accuracy: float) -> float:
    """Structure-balance schedule used by the labeling loop: accuracy squared."""
    return float(test_accuracy) ** 2


def save_model(model: MlpModel, path) -> None:
    np.savez(
        path,
        format_version=np.array([MODEL_FORMAT_VERSION]),
        w_hidden=model.w_hidden,
        b_hidden=model.b_hidden,
        w_out=model.w_out,
        b_out=model.b_out,
    )


def load_model(path) -> MlpModel:
    with np.load(path) as data:
        version = int(data["format_version"][0])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        return MlpModel(
            w_hidden=data["w_hidden"],
            b_hidden=data["b_hidden"],
            w_out=data["w_out"],
            b_out=data["b_out"],
        )


def stratified_split(labels, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-class split; returns (train_indices, test_indices)."""
    y = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(round(idx.size * test_fraction))
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))
