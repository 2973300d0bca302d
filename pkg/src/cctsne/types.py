"""Domain types, input validation, and seeded random initialization.

All matrices are float64 numpy arrays. Validation happens once at the
boundary; the numeric code assumes validated inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidHyperparam,
    InvalidSize,
    NonFiniteValue,
    NotRowStochastic,
)

ROW_SUM_TOL = 1e-6


def _as_float_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidSize(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """n instances by d feature values."""

    values: np.ndarray

    @classmethod
    def validate(cls, values) -> "FeatureMatrix":
        arr = _as_float_matrix(values, "features")
        n, d = arr.shape
        if n < 2 or d < 1:
            raise InvalidSize(f"features need at least 2 rows and 1 column, got {n}x{d}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise NonFiniteValue(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        return cls(arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ClassProbabilityMatrix:
    """n instances by m per-class probabilities; rows sum to 1."""

    values: np.ndarray
    class_names: tuple[str, ...]

    @classmethod
    def validate(cls, values, class_names=None) -> "ClassProbabilityMatrix":
        arr = _as_float_matrix(values, "probabilities")
        n, m = arr.shape
        if m < 2:
            raise InvalidSize(f"need at least 2 classes, got {m}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise NonFiniteValue(f"non-finite probability at row {bad[0]}, column {bad[1]}")
        if np.any(arr < 0.0):
            bad = np.argwhere(arr < 0.0)[0]
            raise NotRowStochastic(int(bad[0]), float(arr[bad[0]].sum()))
        sums = arr.sum(axis=1)
        off = np.abs(sums - 1.0)
        if np.any(off > ROW_SUM_TOL):
            row = int(np.argmax(off > ROW_SUM_TOL))
            raise NotRowStochastic(row, float(sums[row]))
        # renormalize exactly so downstream KL terms are well-posed
        arr = arr / sums[:, None]
        if class_names is None:
            class_names = tuple(f"c{u}" for u in range(m))
        else:
            class_names = tuple(str(c) for c in class_names)
            if len(class_names) != m:
                raise DimensionMismatch(
                    f"{len(class_names)} class names for {m} probability columns"
                )
        return cls(arr, class_names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def validate_inputs(
    features: FeatureMatrix, probabilities: ClassProbabilityMatrix
) -> tuple[FeatureMatrix, ClassProbabilityMatrix]:
    """Check that a feature matrix and probability matrix describe the same instances."""
    if features.n != probabilities.n:
        raise DimensionMismatch(
            f"features have {features.n} rows but probabilities have {probabilities.n}"
        )
    return features, probabilities


@dataclass
class EmbeddingState:
    """Mutable optimization state: 2D point and landmark positions plus velocities."""

    points: np.ndarray      # (n, 2)
    landmarks: np.ndarray   # (m, 2)
    iteration: int = 0
    velocity_points: np.ndarray = None
    velocity_landmarks: np.ndarray = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.landmarks = np.asarray(self.landmarks, dtype=np.float64)
        if self.velocity_points is None:
            self.velocity_points = np.zeros_like(self.points)
        if self.velocity_landmarks is None:
            self.velocity_landmarks = np.zeros_like(self.landmarks)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.landmarks.shape[0]

    def copy(self) -> "EmbeddingState":
        return EmbeddingState(
            points=self.points.copy(),
            landmarks=self.landmarks.copy(),
            iteration=self.iteration,
            velocity_points=self.velocity_points.copy(),
            velocity_landmarks=self.velocity_landmarks.copy(),
        )


@dataclass(frozen=True)
class Hyperparams:
    """Optimization settings; defaults follow standard t-SNE practice."""

    alpha: float = 0.5
    penalty_weight: float = 0.25
    perplexity: float = 30.0
    n_iter: int = 1000
    learning_rate: float = 200.0
    momentum_switch_iter: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    early_exaggeration_factor: float = 4.0
    early_exaggeration_iters: int = 100
    seed: int = 0

    def validated(self) -> "Hyperparams":
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidHyperparam(f"alpha must be in [0, 1], got {self.alpha}")
        if self.penalty_weight <= 0.0:
            raise InvalidHyperparam(f"lambda must be > 0, got {self.penalty_weight}")
        if self.perplexity < 2.0:
            raise InvalidHyperparam(f"perplexity must be >= 2, got {self.perplexity}")
        if self.n_iter < 1:
            raise InvalidHyperparam(f"iterations must be positive, got {self.n_iter}")
        if self.learning_rate <= 0.0:
            raise InvalidHyperparam(f"learning rate must be > 0, got {self.learning_rate}")
        for name in ("momentum_early", "momentum_late"):
            mu = getattr(self, name)
            if not 0.0 <= mu < 1.0:
                raise InvalidHyperparam(f"{name} must be in [0, 1), got {mu}")
        if self.early_exaggeration_factor < 1.0:
            raise InvalidHyperparam(
                f"exaggeration factor must be >= 1, got {self.early_exaggeration_factor}"
            )
        return self

    def with_alpha(self, alpha: float) -> "Hyperparams":
        return replace(self, alpha=float(alpha)).validated()


INIT_STDDEV = 1e-2  # positions start from N(0, 1e-4 I)


def gaussian_init(rows: int, rng: np.random.Generator) -> np.ndarray:
    """Draw rows x 2 positions from the shared generator (order matters for reproducibility)."""
    if rows < 1:
        raise InvalidSize(f"cannot initialize {rows} rows")
    return rng.normal(loc=0.0, scale=INIT_STDDEV, size=(rows, 2))


def seeded_gaussian_init(rows: int, seed: int) -> np.ndarray:
    """Deterministic small-variance 2D initialization for a fixed seed."""
    return gaussian_init(rows, np.random.default_rng(seed))
