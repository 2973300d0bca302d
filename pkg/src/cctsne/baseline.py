"""Naive comparison method and plain t-SNE.

The baseline linearly combines two pairwise KL objectives over one shared
low-dimensional distribution: the usual data-feature affinities and a
second affinity matrix built from distances between class-probability
rows. Only point positions are optimized; there are no landmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinities import PairwiseAffinityMatrix, calibrate_conditional, pairwise_squared_distances, symmetrize
from .errors import DimensionMismatch, NonFiniteUpdate
from .optimizer import _pairwise_kl_grad, _unwrap, low_dim_pairwise, momentum_at, pairwise_kl
from .types import ClassProbabilityMatrix, Hyperparams, gaussian_init


@dataclass(frozen=True)
class BaselineCostBreakdown:
    data_kl: float
    probability_kl: float
    combined: float


def class_space_affinities(
    probabilities: ClassProbabilityMatrix, perplexity: float
) -> PairwiseAffinityMatrix:
    """Pairwise affinities computed from Euclidean distances between probability rows."""
    d2 = pairwise_squared_distances(probabilities.values)
    conditional, _ = calibrate_conditional(d2, perplexity)
    return symmetrize(conditional)


def baseline_cost(p_feature, p_prob, points: np.ndarray, alpha: float) -> float:
    """(1-alpha) * KL(P_feature || Q) + alpha * KL(P_prob || Q) at the given positions."""
    q, _, _ = low_dim_pairwise(np.asarray(points, dtype=np.float64))
    return (1.0 - alpha) * pairwise_kl(_unwrap(p_feature), q) + alpha * pairwise_kl(
        _unwrap(p_prob), q
    )


def baseline_grad(p_feature, p_prob, points: np.ndarray, alpha: float) -> np.ndarray:
    """Gradient of the combined objective; linearity lets one mixed P drive the usual formula."""
    Y = np.asarray(points, dtype=np.float64)
    p_mix = (1.0 - alpha) * _unwrap(p_feature) + alpha * _unwrap(p_prob)
    q, kernel, _ = low_dim_pairwise(Y)
    return _pairwise_kl_grad(p_mix, q, kernel, Y)


def _descend_pairwise(
    p_joint: np.ndarray,
    h: Hyperparams,
    init: np.ndarray | None,
    callback,
    trace_fn,
):
    n = p_joint.shape[0]
    if init is None:
        rng = np.random.default_rng(h.seed)
        Y = gaussian_init(n, rng)
        exaggerate = h.early_exaggeration_iters > 0 and h.early_exaggeration_factor > 1.0
    else:
        Y = np.asarray(init, dtype=np.float64).copy()
        if Y.shape != (n, 2):
            raise DimensionMismatch(f"warm-start shape {Y.shape} does not match {n}x2")
        exaggerate = False
    velocity = np.zeros_like(Y)
    P_ex = p_joint * h.early_exaggeration_factor if exaggerate else None
    trace = []
    for k in range(h.n_iter):
        P_k = P_ex if (exaggerate and k < h.early_exaggeration_iters) else p_joint
        q, kernel, _ = low_dim_pairwise(Y)
        trace.append(trace_fn(q))
        g = _pairwise_kl_grad(P_k, q, kernel, Y)
        mu = momentum_at(k, h)
        velocity = mu * velocity - h.learning_rate * g
        Y = Y + velocity
        if not np.all(np.isfinite(Y)):
            raise NonFiniteUpdate(k)
        if callback is not None:
            callback(k + 1, Y)
    return Y, trace


def run_vanilla(
    p_joint, h: Hyperparams, init: np.ndarray | None = None, callback=None
) -> tuple[np.ndarray, list[float]]:
    """Plain t-SNE descent on one pairwise affinity matrix."""
    P = _unwrap(p_joint)
    return _descend_pairwise(P, h.validated(), init, callback, lambda q: pairwise_kl(P, q))


def run_baseline(
    p_feature,
    p_prob,
    h: Hyperparams,
    init: np.ndarray | None = None,
    callback=None,
) -> tuple[np.ndarray, list[BaselineCostBreakdown]]:
    """Descend the alpha-weighted combination of the two pairwise KL objectives."""
    h = h.validated()
    Pd = _unwrap(p_feature)
    Pp = _unwrap(p_prob)
    if Pd.shape != Pp.shape:
        raise DimensionMismatch(f"affinity shapes differ: {Pd.shape} vs {Pp.shape}")
    p_mix = (1.0 - h.alpha) * Pd + h.alpha * Pp

    def trace_fn(q):
        a = pairwise_kl(Pd, q)
        b = pairwise_kl(Pp, q)
        return BaselineCostBreakdown(a, b, (1.0 - h.alpha) * a + h.alpha * b)

    return _descend_pairwise(p_mix, h, init, callback, trace_fn)


def sweep_alpha_baseline(
    p_feature, p_prob, h: Hyperparams, alphas, init: np.ndarray | None = None
) -> list[np.ndarray]:
    """Chained warm-started baseline runs over an alpha schedule."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("alphas must be non-empty")
    outputs: list[np.ndarray] = []
    current = init
    for a in alphas:
        final, _ = run_baseline(p_feature, p_prob, h.with_alpha(a), init=current)
        outputs.append(final)
        current = final
    return outputs
