"""High-dimensional affinities.

Builds the perplexity-calibrated pairwise neighbor distribution over
instances and the instance-to-class distribution taken straight from the
class probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationFailed, InvalidHyperparam
from .types import ClassProbabilityMatrix, FeatureMatrix

# entropy tolerance (base-2) for the bandwidth search
ENTROPY_TOL = 1e-5
MAX_BRACKET_EXPANSIONS = 64
MAX_BISECTIONS = 50
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class PairwiseAffinityMatrix:
    """Symmetric joint neighbor probabilities; zero diagonal, total sum 1."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BandwidthVector:
    """Per-instance Gaussian bandwidths found by the perplexity search."""

    sigma: np.ndarray


def pairwise_squared_distances(features) -> np.ndarray:
    """Exact squared Euclidean distances between all instance pairs.

    Computed from explicit row differences (not the expanded dot-product
    form) so results match a naive per-pair evaluation bit for bit.
    """
    X = features.values if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=np.float64)
    n = X.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    # row blocks keep the (block, n, d) difference tensor small
    block = max(1, int(2e7 // max(1, n * X.shape[1])))
    for start in range(0, n, block):
        stop = min(n, start + block)
        diff = X[start:stop, None, :] - X[None, :, :]
        out[start:stop] = (diff * diff).sum(axis=2)
    np.fill_diagonal(out, 0.0)
    return out


def _row_probabilities(sq_dists: np.ndarray, beta: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Conditional neighbor probabilities for the given rows at precision beta."""
    sel = np.arange(rows.size)
    logits = -sq_dists[rows] * beta[:, None]
    logits[sel, rows] = -np.inf
    # shift by the per-row max so the nearest neighbor never underflows
    logits -= logits.max(axis=1, keepdims=True)
    W = np.exp(logits)
    P = W / W.sum(axis=1, keepdims=True)
    # floor tiny probabilities so downstream KL terms never hit log(0)
    P = np.maximum(P, PROB_FLOOR)
    P[sel, rows] = 0.0
    return P / P.sum(axis=1, keepdims=True)


def _entropy_bits(P: np.ndarray) -> np.ndarray:
    logP = np.where(P > 0.0, np.log2(np.maximum(P, 1e-300)), 0.0)
    return -(P * logP).sum(axis=1)


def calibrate_conditional(
    sq_dists: np.ndarray, perplexity: float
) -> tuple[np.ndarray, BandwidthVector]:
    """Find per-row Gaussian precisions matching the target perplexity.

    Bracket expansion doubles/halves beta up to 64 times, then plain
    bisection (at most 50 steps) until the row entropy is within 1e-5
    bits of log2(perplexity).
    """
    D2 = np.asarray(sq_dists, dtype=np.float64)
    n = D2.shape[0]
    if not 2.0 <= perplexity < n:
        raise InvalidHyperparam(f"perplexity must satisfy 2 <= perplexity < n={n}, got {perplexity}")
    target = np.log2(perplexity)

    beta = np.ones(n)
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    have_lo = np.zeros(n, dtype=bool)
    have_hi = np.zeros(n, dtype=bool)
    done = np.zeros(n, dtype=bool)

    def sweep(active: np.ndarray) -> np.ndarray:
        P = _row_probabilities(D2, beta[active], active)
        return _entropy_bits(P)

    # phase 1: expand until every row either converges or has a sign change
    for _ in range(MAX_BRACKET_EXPANSIONS + 1):
        active = np.flatnonzero(~done & ~(have_lo & have_hi))
        if active.size == 0:
            break
        H = sweep(active)
        hit = np.abs(H - target) <= ENTROPY_TOL
        done[active[hit]] = True
        act = active[~hit]
        Ha = H[~hit]
        too_high = Ha > target  # entropy too high -> need larger beta
        up = act[too_high]
        lo[up] = beta[up]
        have_lo[up] = True
        beta[up[~have_hi[up]]] *= 2.0
        down = act[~too_high]
        hi[down] = beta[down]
        have_hi[down] = True
        beta[down[~have_lo[down]]] *= 0.5

    stuck = np.flatnonzero(~done & ~(have_lo & have_hi))
    if stuck.size:
        raise CalibrationFailed(int(stuck[0]))

    # phase 2: bisect inside the bracket
    for _ in range(MAX_BISECTIONS):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        beta[active] = 0.5 * (lo[active] + hi[active])
        H = sweep(active)
        hit = np.abs(H - target) <= ENTROPY_TOL
        done[active[hit]] = True
        act = active[~hit]
        Ha = H[~hit]
        too_high = Ha > target
        lo[act[too_high]] = beta[act[too_high]]
        hi[act[~too_high]] = beta[act[~too_high]]

    not_done = np.flatnonzero(~done)
    if not_done.size:
        raise CalibrationFailed(int(not_done[0]), "entropy tolerance not reached")

    conditional = _row_probabilities(D2, beta, np.arange(n))
    sigma = np.sqrt(1.0 / (2.0 * beta))
    return conditional, BandwidthVector(sigma)


def symmetrize(conditional: np.ndarray) -> PairwiseAffinityMatrix:
    """Joint affinities p_ij = (p_j|i + p_i|j) / 2n."""
    cond = np.asarray(conditional, dtype=np.float64)
    n = cond.shape[0]
    joint = (cond + cond.T) / (2.0 * n)
    return PairwiseAffinityMatrix(joint)


def class_affinities(probabilities: ClassProbabilityMatrix) -> np.ndarray:
    """Instance-to-class target distribution: the probability rows themselves."""
    values = probabilities.values
    sums = values.sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-9), "probability rows must sum to 1"
    return values.copy()


def joint_affinities(
    features: FeatureMatrix, perplexity: float
) -> tuple[PairwiseAffinityMatrix, BandwidthVector]:
    """Full pipeline: distances -> calibrated conditionals -> symmetrized joint."""
    D2 = pairwise_squared_distances(features)
    conditional, bandwidths = calibrate_conditional(D2, perplexity)
    return symmetrize(conditional), bandwidths
