"""Synthetic benchmark: five 10D unit-variance Gaussian clusters carrying
four class labels, plus a handful of conflicting noise points that look
like the label-3 clusters but are labeled 0.
"""

from __future__ import annotations

import numpy as np

from .types import FeatureMatrix

DIMENSIONS = 10
NOISE_COUNT = 8

# centers: two nearly-overlapping clusters (labels 0/1), one separate
# cluster (label 2), and two mutually-separated clusters sharing label 3
_CENTERS = np.zeros((5, DIMENSIONS))
_CENTERS[1, 0] = 1.5    # label 1, close to label 0
_CENTERS[2, 1] = 10.0   # label 2
_CENTERS[3, 0] = 10.0   # label 3, first cluster
_CENTERS[4, 0] = 10.0   # label 3, second cluster
_CENTERS[4, 1] = 10.0

_CLUSTER_SIZES = (100, 100, 100, 50, 50)
_CLUSTER_LABELS = (0, 1, 2, 3, 3)


def cluster_centers() -> np.ndarray:
    return _CENTERS.copy()


def generate(seed: int) -> tuple[FeatureMatrix, np.ndarray]:
    """Deterministic dataset for a fixed seed; returns features and true labels.

    408 instances: 100 each for labels 0/1/2, 100 for label 3 (two clusters
    of 50), and 8 noise points drawn from the label-3 clusters but labeled 0.
    """
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for center, size, label in zip(_CENTERS, _CLUSTER_SIZES, _CLUSTER_LABELS):
        rows.append(rng.normal(loc=center, scale=1.0, size=(size, DIMENSIONS)))
        labels.extend([label] * size)
    # conflicting noise: feature values like the label-3 clusters, labeled 0
    half = NOISE_COUNT // 2
    rows.append(rng.normal(loc=_CENTERS[3], scale=1.0, size=(half, DIMENSIONS)))
    rows.append(rng.normal(loc=_CENTERS[4], scale=1.0, size=(NOISE_COUNT - half, DIMENSIONS)))
    labels.extend([0] * NOISE_COUNT)
    X = np.vstack(rows)
    return FeatureMatrix.validate(X), np.asarray(labels, dtype=np.int64)


def noise_indices() -> np.ndarray:
    """Row indices of the conflicting noise points."""
    n_clustered = sum(_CLUSTER_SIZES)
    return np.arange(n_clustered, n_clustered + NOISE_COUNT)
