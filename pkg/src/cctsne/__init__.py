"""Class-constrained t-SNE: joint 2D embedding of data points and class landmarks."""

from .affinities import (
    BandwidthVector,
    PairwiseAffinityMatrix,
    calibrate_conditional,
    class_affinities,
    joint_affinities,
    pairwise_squared_distances,
    symmetrize,
)
from .baseline import class_space_affinities, run_baseline, run_vanilla, sweep_alpha_baseline
from .estimators import ClassConstrainedTSNE, CombinedKLBaseline
from .metrics import ccm, continuity, knn_indices, labels_from_probabilities, trustworthiness
from .optimizer import (
    CostBreakdown,
    LowDimAffinities,
    cost,
    grad_data_points,
    grad_landmarks,
    low_dim_class,
    low_dim_pairwise,
    run,
    step,
    sweep_alpha,
)
from .types import (
    ClassProbabilityMatrix,
    EmbeddingState,
    FeatureMatrix,
    Hyperparams,
    seeded_gaussian_init,
    validate_inputs,
)

__version__ = "0.1.0"

__all__ = [
    "BandwidthVector",
    "ClassConstrainedTSNE",
    "ClassProbabilityMatrix",
    "CombinedKLBaseline",
    "CostBreakdown",
    "EmbeddingState",
    "FeatureMatrix",
    "Hyperparams",
    "LowDimAffinities",
    "PairwiseAffinityMatrix",
    "calibrate_conditional",
    "ccm",
    "class_affinities",
    "class_space_affinities",
    "continuity",
    "cost",
    "grad_data_points",
    "grad_landmarks",
    "joint_affinities",
    "knn_indices",
    "labels_from_probabilities",
    "low_dim_class",
    "low_dim_pairwise",
    "pairwise_squared_distances",
    "run",
    "run_baseline",
    "run_vanilla",
    "seeded_gaussian_init",
    "step",
    "sweep_alpha",
    "sweep_alpha_baseline",
    "symmetrize",
    "trustworthiness",
    "validate_inputs",
]
