"""Joint gradient-descent optimization of 2D points and class landmarks.

Point positions trade off two objectives weighted by alpha: a KL term
matching the pairwise data-feature affinities, and a per-instance KL term
(plus a quadratic pull with weight lambda) matching class probabilities
against point-to-landmark affinities. Landmarks descend the class term
only. Updates use plain gradient descent with momentum; no adaptive gains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinities import PairwiseAffinityMatrix
from .errors import DimensionMismatch, NonFiniteUpdate
from .types import EmbeddingState, Hyperparams, gaussian_init

Q_FLOOR = 1e-12


def _unwrap(p) -> np.ndarray:
    if isinstance(p, PairwiseAffinityMatrix):
        return p.values
    return np.asarray(p, dtype=np.float64)


def _squared_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq_a = (A * A).sum(axis=1)
    sq_b = (B * B).sum(axis=1)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    return np.maximum(d2, 0.0)


@dataclass(frozen=True)
class LowDimAffinities:
    """Student-t similarities in the embedding, pairwise and point-to-landmark."""

    q_pairwise: np.ndarray       # (n, n), zero diagonal, sums to 1
    q_class: np.ndarray          # (n, m), rows sum to 1
    kernel_pairwise: np.ndarray  # (1 + d2)^-1 between points
    kernel_class: np.ndarray     # (1 + d2)^-1 between points and landmarks
    z_pairwise: float
    z_class_rows: np.ndarray
    sq_dists_class: np.ndarray   # (n, m) squared point-to-landmark distances


def low_dim_pairwise(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Normalized Student-t pairwise similarities; returns (q, kernel, normalizer)."""
    Y = np.asarray(points, dtype=np.float64)
    kernel = 1.0 / (1.0 + _squared_dists(Y, Y))
    np.fill_diagonal(kernel, 0.0)
    z = kernel.sum()
    z = z if z > 0.0 else Q_FLOOR
    q = np.maximum(kernel / z, Q_FLOOR)
    np.fill_diagonal(q, 0.0)
    return q, kernel, float(z)


def low_dim_class(points: np.ndarray, landmarks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-instance Student-t similarities to each landmark; rows normalized."""
    q, kernel, z_rows, _ = _low_dim_class_full(
        np.asarray(points, dtype=np.float64), np.asarray(landmarks, dtype=np.float64)
    )
    return q, kernel, z_rows


def _low_dim_class_full(Y: np.ndarray, V: np.ndarray):
    d2 = _squared_dists(Y, V)
    kernel = 1.0 / (1.0 + d2)
    z_rows = kernel.sum(axis=1)
    q = np.maximum(kernel / z_rows[:, None], Q_FLOOR)
    return q, kernel, z_rows, d2


def low_dim_affinities(points: np.ndarray, landmarks: np.ndarray) -> LowDimAffinities:
    Y = np.asarray(points, dtype=np.float64)
    V = np.asarray(landmarks, dtype=np.float64)
    q_pair, k_pair, z = low_dim_pairwise(Y)
    q_cls, k_cls, z_rows, d2 = _low_dim_class_full(Y, V)
    return LowDimAffinities(q_pair, q_cls, k_pair, k_cls, z, z_rows, d2)


@dataclass(frozen=True)
class CostBreakdown:
    """Objective terms at one state.

    point_cost is what the data points descend: (1-alpha) * data_kl +
    alpha * (class_kl + lambda * class_penalty). landmark_cost is what the
    landmarks descend: class_kl + lambda * class_penalty.
    """

    data_kl: float
    class_kl: float
    class_penalty: float
    point_cost: float
    landmark_cost: float


def _log_nonzero(x: np.ndarray) -> np.ndarray:
    # log of positive entries; exact zeros map to 0 so p=0 terms drop out
    return np.log(x + (x == 0.0))


def _entropy_const(p: np.ndarray) -> float:
    """Sum of p * ln p over nonzero entries (the q-independent part of a KL)."""
    return float(np.sum(p * _log_nonzero(p)))


def pairwise_kl(p: np.ndarray, q: np.ndarray) -> float:
    """KL divergence over all pairs; entries with p == 0 contribute 0."""
    return float(np.sum(p * (_log_nonzero(p) - _log_nonzero(q))))


def _cost_from_aff(
    p_pairwise: np.ndarray,
    p_class: np.ndarray,
    aff: LowDimAffinities,
    alpha: float,
    penalty_weight: float,
    entropy_pair: float | None = None,
    entropy_class: float | None = None,
) -> CostBreakdown:
    n, m = p_class.shape
    if entropy_pair is None:
        entropy_pair = _entropy_const(p_pairwise)
    if entropy_class is None:
        entropy_class = _entropy_const(p_class)
    data_kl = entropy_pair - float(np.sum(p_pairwise * _log_nonzero(aff.q_pairwise)))
    class_kl = (entropy_class - float(np.sum(p_class * _log_nonzero(aff.q_class)))) / n
    class_penalty = float(np.sum(p_class * aff.sq_dists_class)) / (n * m)
    landmark_cost = class_kl + penalty_weight * class_penalty
    point_cost = (1.0 - alpha) * data_kl + alpha * landmark_cost
    return CostBreakdown(data_kl, class_kl, class_penalty, point_cost, landmark_cost)


def cost(p_pairwise, p_class, points, landmarks, alpha: float, penalty_weight: float) -> CostBreakdown:
    P = _unwrap(p_pairwise)
    pc = np.asarray(p_class, dtype=np.float64)
    Y = np.asarray(points, dtype=np.float64)
    V = np.asarray(landmarks, dtype=np.float64)
    aff = low_dim_affinities(Y, V)
    return _cost_from_aff(P, pc, aff, alpha, penalty_weight)


def _pairwise_kl_grad(p: np.ndarray, q: np.ndarray, kernel: np.ndarray, points: np.ndarray) -> np.ndarray:
    # 4 * sum_j (p_ij - q_ij) * kernel_ij * (y_i - y_j)
    W = (p - q) * kernel
    return 4.0 * (W.sum(axis=1)[:, None] * points - W @ points)


def _class_grad_points(
    p_class: np.ndarray,
    aff: LowDimAffinities,
    points: np.ndarray,
    landmarks: np.ndarray,
    penalty_weight: float,
) -> np.ndarray:
    n, m = p_class.shape
    W = (p_class - aff.q_class) * aff.kernel_class
    kl_part = W.sum(axis=1)[:, None] * points - W @ landmarks
    pen_part = p_class.sum(axis=1)[:, None] * points - p_class @ landmarks
    return (2.0 / n) * (kl_part + (penalty_weight / m) * pen_part)


def _class_grad_landmarks(
    p_class: np.ndarray,
    aff: LowDimAffinities,
    points: np.ndarray,
    landmarks: np.ndarray,
    penalty_weight: float,
) -> np.ndarray:
    n, m = p_class.shape
    W = (p_class - aff.q_class) * aff.kernel_class
    kl_part = W.sum(axis=0)[:, None] * landmarks - W.T @ points
    pen_part = p_class.sum(axis=0)[:, None] * landmarks - p_class.T @ points
    return (2.0 / n) * (kl_part + (penalty_weight / m) * pen_part)


def grad_data_points(p_pairwise, p_class, points, landmarks, alpha: float, penalty_weight: float) -> np.ndarray:
    """Gradient of the point objective with respect to every point position."""
    P = _unwrap(p_pairwise)
    pc = np.asarray(p_class, dtype=np.float64)
    Y = np.asarray(points, dtype=np.float64)
    V = np.asarray(landmarks, dtype=np.float64)
    aff = low_dim_affinities(Y, V)
    g_data = _pairwise_kl_grad(P, aff.q_pairwise, aff.kernel_pairwise, Y)
    g_class = _class_grad_points(pc, aff, Y, V, penalty_weight)
    return (1.0 - alpha) * g_data + alpha * g_class


def grad_landmarks(p_class, points, landmarks, penalty_weight: float) -> np.ndarray:
    """Gradient of the landmark objective with respect to every landmark position."""
    pc = np.asarray(p_class, dtype=np.float64)
    Y = np.asarray(points, dtype=np.float64)
    V = np.asarray(landmarks, dtype=np.float64)
    aff = low_dim_affinities(Y, V)
    return _class_grad_landmarks(pc, aff, Y, V, penalty_weight)


def momentum_at(iteration: int, h: Hyperparams) -> float:
    return h.momentum_early if iteration < h.momentum_switch_iter else h.momentum_late


def _apply_update(
    state: EmbeddingState,
    g_points: np.ndarray,
    g_landmarks: np.ndarray,
    h: Hyperparams,
) -> EmbeddingState:
    n, m = state.n, state.m
    mu = momentum_at(state.iteration, h)
    vel_p = mu * state.velocity_points - h.learning_rate * g_points
    vel_l = mu * state.velocity_landmarks - (h.learning_rate * m / n) * g_landmarks
    points = state.points + vel_p
    landmarks = state.landmarks + vel_l
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(landmarks))):
        raise NonFiniteUpdate(state.iteration)
    return EmbeddingState(points, landmarks, state.iteration + 1, vel_p, vel_l)


def step(state: EmbeddingState, p_pairwise, p_class, h: Hyperparams) -> EmbeddingState:
    """One descent update of points and landmarks; pure (returns a new state)."""
    P = _unwrap(p_pairwise)
    pc = np.asarray(p_class, dtype=np.float64)
    aff = low_dim_affinities(state.points, state.landmarks)
    g_data = _pairwise_kl_grad(P, aff.q_pairwise, aff.kernel_pairwise, state.points)
    g_class = _class_grad_points(pc, aff, state.points, state.landmarks, h.penalty_weight)
    g_points = (1.0 - h.alpha) * g_data + h.alpha * g_class
    g_landmarks = _class_grad_landmarks(pc, aff, state.points, state.landmarks, h.penalty_weight)
    return _apply_update(state, g_points, g_landmarks, h)


def run(
    p_pairwise,
    p_class,
    h: Hyperparams,
    init: EmbeddingState | None = None,
    callback=None,
) -> tuple[EmbeddingState, list[CostBreakdown]]:
    """Full optimization.

    Cold starts (no init) draw positions from the seeded generator (points
    first, then landmarks) and exaggerate the pairwise affinities for the
    first configured iterations. Warm starts reuse the given positions with
    fresh velocities and skip exaggeration entirely.

    Returns the final state and a trace with one entry per iteration; entry
    k is the cost (always against the unexaggerated affinities) of the state
    entering iteration k.
    """
    h = h.validated()
    P = _unwrap(p_pairwise)
    pc = np.asarray(p_class, dtype=np.float64)
    n = P.shape[0]
    m = pc.shape[1]
    if pc.shape[0] != n:
        raise DimensionMismatch(f"pairwise affinities are {n}x{n} but class affinities have {pc.shape[0]} rows")

    if init is None:
        rng = np.random.default_rng(h.seed)
        state = EmbeddingState(gaussian_init(n, rng), gaussian_init(m, rng))
        exaggerate = h.early_exaggeration_iters > 0 and h.early_exaggeration_factor > 1.0
    else:
        if init.points.shape != (n, 2) or init.landmarks.shape != (m, 2):
            raise DimensionMismatch(
                f"warm-start shapes {init.points.shape}/{init.landmarks.shape} do not match {n}x2/{m}x2"
            )
        state = EmbeddingState(init.points.copy(), init.landmarks.copy())
        exaggerate = False

    P_ex = P * h.early_exaggeration_factor if exaggerate else None
    entropy_pair = _entropy_const(P)
    entropy_class = _entropy_const(pc)
    trace: list[CostBreakdown] = []
    for k in range(h.n_iter):
        P_k = P_ex if (exaggerate and k < h.early_exaggeration_iters) else P
        aff = low_dim_affinities(state.points, state.landmarks)
        trace.append(
            _cost_from_aff(P, pc, aff, h.alpha, h.penalty_weight, entropy_pair, entropy_class)
        )
        g_data = _pairwise_kl_grad(P_k, aff.q_pairwise, aff.kernel_pairwise, state.points)
        g_class = _class_grad_points(pc, aff, state.points, state.landmarks, h.penalty_weight)
        g_points = (1.0 - h.alpha) * g_data + h.alpha * g_class
        g_landmarks = _class_grad_landmarks(pc, aff, state.points, state.landmarks, h.penalty_weight)
        state = _apply_update(state, g_points, g_landmarks, h)
        if callback is not None:
            callback(state)
    return state, trace


def sweep_alpha(
    p_pairwise,
    p_class,
    h: Hyperparams,
    alphas,
    init: EmbeddingState | None = None,
) -> list[EmbeddingState]:
    """Chained runs over an alpha schedule, each warm-started from the last."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("alphas must be non-empty")
    states: list[EmbeddingState] = []
    current = init
    for a in alphas:
        final, _ = run(p_pairwise, p_class, h.with_alpha(a), init=current)
        states.append(final)
        current = final
    return states
