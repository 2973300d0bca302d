"""Projection quality measures: trustworthiness, continuity, and the
class consistency measure (fraction of points whose nearest class centroid
is not their own). Neighbor ranks use exact Euclidean distances with ties
broken by lower index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidK, SingleClass

DEFAULT_K = 7


def _sq_dists(points: np.ndarray) -> np.ndarray:
    sq = (points * points).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    return np.maximum(d2, 0.0)


def _neighbor_order(points: np.ndarray) -> np.ndarray:
    """Indices of all other points sorted by distance (ties by lower index), self excluded."""
    d2 = _sq_dists(points)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :-1]


def knn_indices(points: np.ndarray, k: int) -> np.ndarray:
    """Exact k nearest neighbors per row."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if not 1 <= k < n:
        raise InvalidK(f"k must satisfy 1 <= k < n={n}, got {k}")
    return _neighbor_order(pts)[:, :k]


def _rank_penalty(order_ref: np.ndarray, knn_ref: np.ndarray, knn_other: np.ndarray, k: int) -> float:
    """Sum over points of (reference-space rank - k) for neighbors found only in the other space."""
    n = order_ref.shape[0]
    ranks = np.empty((n, n), dtype=np.int64)
    cols = np.arange(1, n, dtype=np.int64)  # 1-based rank among the other points
    for i in range(n):
        ranks[i, order_ref[i]] = cols
        ranks[i, i] = 0
    total = 0
    for i in range(n):
        extra = np.setdiff1d(knn_other[i], knn_ref[i], assume_unique=True)
        total += int((ranks[i, extra] - k).sum())
    return float(total)


def trustworthiness(x_highdim, y_lowdim, k: int = DEFAULT_K) -> float:
    """Penalizes projection-space neighbors that are far in the original space."""
    X = np.asarray(x_highdim, dtype=np.float64)
    Y = np.asarray(y_lowdim, dtype=np.float64)
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DimensionMismatch(f"spaces disagree on instance count: {n} vs {Y.shape[0]}")
    if not 1 <= k < n / 2:
        raise InvalidK(f"k must satisfy 1 <= k < n/2 = {n / 2}, got {k}")
    order_high = _neighbor_order(X)
    knn_high = order_high[:, :k]
    knn_low = _neighbor_order(Y)[:, :k]
    penalty = _rank_penalty(order_high, knn_high, knn_low, k)
    return 1.0 - 2.0 * penalty / (n * k * (2 * n - 3 * k - 1))


def continuity(x_highdim, y_lowdim, k: int = DEFAULT_K) -> float:
    """Penalizes original-space neighbors lost in the projection; mirror of trustworthiness."""
    return trustworthiness(y_lowdim, x_highdim, k)


def labels_from_probabilities(probabilities) -> np.ndarray:
    """Predicted class per instance; argmax with ties going to the lowest index."""
    values = getattr(probabilities, "values", probabilities)
    return np.argmax(np.asarray(values, dtype=np.float64), axis=1)


def ccm(points: np.ndarray, labels) -> float:
    """Fraction of points strictly closer to another class's centroid than their own."""
    Y = np.asarray(points, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.int64)
    classes = np.unique(lab)
    if classes.size < 2:
        raise SingleClass(f"need at least 2 distinct labels, got {classes.size}")
    centroids = np.vstack([Y[lab == c].mean(axis=0) for c in classes])
    class_pos = {c: i for i, c in enumerate(classes)}
    own = np.array([class_pos[c] for c in lab])
    d2 = (
        (Y * Y).sum(axis=1)[:, None]
        + (centroids * centroids).sum(axis=1)[None, :]
        - 2.0 * Y @ centroids.T
    )
    violations = d2.min(axis=1) < d2[np.arange(Y.shape[0]), own]
    return float(violations.mean())


@dataclass(frozen=True)
class MetricsReport:
    method: str  # cctsne | baseline | vanilla
    alpha: float
    seed: int
    trustworthiness: float
    continuity: float
    ccm: float
    k: int


METRICS_CSV_HEADER = ["method", "alpha", "seed", "trustworthiness", "continuity", "ccm", "k"]


def write_metrics_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_CSV_HEADER)
        for r in reports:
            writer.writerow(
                [r.method, repr(r.alpha), r.seed, repr(r.trustworthiness), repr(r.continuity), repr(r.ccm), r.k]
            )


def read_metrics_csv(path) -> list[MetricsReport]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for row in rows[1:]:
        out.append(
            MetricsReport(
                method=row[0],
                alpha=float(row[1]),
                seed=int(row[2]),
                trustworthiness=float(row[3]),
                continuity=float(row[4]),
                ccm=float(row[5]),
                k=int(row[6]),
            )
        )
    return out
