"""Scikit-learn style wrappers around the functional core.

Both estimators take the feature matrix X plus the per-instance class
probability matrix T and produce a 2D embedding via fit / fit_transform.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import affinities, baseline, optimizer
from .types import ClassProbabilityMatrix, EmbeddingState, FeatureMatrix, Hyperparams, validate_inputs


def _coerce_inputs(X, T) -> tuple[FeatureMatrix, ClassProbabilityMatrix]:
    features = X if isinstance(X, FeatureMatrix) else FeatureMatrix.validate(X)
    probs = T if isinstance(T, ClassProbabilityMatrix) else ClassProbabilityMatrix.validate(T)
    return validate_inputs(features, probs)


class ClassConstrainedTSNE(BaseEstimator):
    """Joint 2D embedding of instances and class landmarks.

    Parameters mirror Hyperparams; `alpha` balances data-feature structure
    (0) against class-probability structure (1), `penalty_weight` scales
    the quadratic pull between points and their probable landmarks.
    """

    def __init__(
        self,
        alpha: float = 0.5,
        penalty_weight: float = 0.25,
        perplexity: float = 30.0,
        n_iter: int = 1000,
        learning_rate: float = 200.0,
        momentum_switch_iter: int = 250,
        momentum_early: float = 0.5,
        momentum_late: float = 0.8,
        early_exaggeration_factor: float = 4.0,
        early_exaggeration_iters: int = 100,
        random_state: int = 0,
    ):
        self.alpha = alpha
        self.penalty_weight = penalty_weight
        self.perplexity = perplexity
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.momentum_switch_iter = momentum_switch_iter
        self.momentum_early = momentum_early
        self.momentum_late = momentum_late
        self.early_exaggeration_factor = early_exaggeration_factor
        self.early_exaggeration_iters = early_exaggeration_iters
        self.random_state = random_state

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            alpha=self.alpha,
            penalty_weight=self.penalty_weight,
            perplexity=self.perplexity,
            n_iter=self.n_iter,
            learning_rate=self.learning_rate,
            momentum_switch_iter=self.momentum_switch_iter,
            momentum_early=self.momentum_early,
            momentum_late=self.momentum_late,
            early_exaggeration_factor=self.early_exaggeration_factor,
            early_exaggeration_iters=self.early_exaggeration_iters,
            seed=self.random_state,
        ).validated()

    def fit(self, X, T, init: EmbeddingState | None = None):
        features, probs = _coerce_inputs(X, T)
        h = self._hyperparams()
        p_pair, bandwidths = affinities.joint_affinities(features, h.perplexity)
        p_class = affinities.class_affinities(probs)
        state, trace = optimizer.run(p_pair.values, p_class, h, init=init)
        self.embedding_ = state.points
        self.landmarks_ = state.landmarks
        self.state_ = state
        self.cost_trace_ = trace
        self.bandwidths_ = bandwidths.sigma
        self.class_names_ = probs.class_names
        return self

    def fit_transform(self, X, T, init: EmbeddingState | None = None) -> np.ndarray:
        return self.fit(X, T, init=init).embedding_


class CombinedKLBaseline(BaseEstimator):
    """Naive combination baseline: blends the data-feature KL with a second
    pairwise KL built from class-probability distances; no landmarks."""

    def __init__(
        self,
        alpha: float = 0.5,
        perplexity: float = 30.0,
        n_iter: int = 1000,
        learning_rate: float = 200.0,
        momentum_switch_iter: int = 250,
        momentum_early: float = 0.5,
        momentum_late: float = 0.8,
        early_exaggeration_factor: float = 4.0,
        early_exaggeration_iters: int = 100,
        random_state: int = 0,
    ):
        self.alpha = alpha
        self.perplexity = perplexity
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.momentum_switch_iter = momentum_switch_iter
        self.momentum_early = momentum_early
        self.momentum_late = momentum_late
        self.early_exaggeration_factor = early_exaggeration_factor
        self.early_exaggeration_iters = early_exaggeration_iters
        self.random_state = random_state

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            alpha=self.alpha,
            perplexity=self.perplexity,
            n_iter=self.n_iter,
            learning_rate=self.learning_rate,
            momentum_switch_iter=self.momentum_switch_iter,
            momentum_early=self.momentum_early,
            momentum_late=self.momentum_late,
            early_exaggeration_factor=self.early_exaggeration_factor,
            early_exaggeration_iters=self.early_exaggeration_iters,
            seed=self.random_state,
        ).validated()

    def fit(self, X, T, init: np.ndarray | None = None):
        features, probs = _coerce_inputs(X, T)
        h = self._hyperparams()
        p_feature, _ = affinities.joint_affinities(features, h.perplexity)
        p_prob = baseline.class_space_affinities(probs, h.perplexity)
        points, trace = baseline.run_baseline(p_feature.values, p_prob.values, h, init=init)
        self.embedding_ = points
        self.cost_trace_ = trace
        return self

    def fit_transform(self, X, T, init: np.ndarray | None = None) -> np.ndarray:
        return self.fit(X, T, init=init).embedding_
