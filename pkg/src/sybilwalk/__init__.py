"""Hybrid fake-account detection: linear SVM priors refined by SybilWalk."""

from sybilwalk.errors import SybilWalkError
from sybilwalk.features import (
    FEATURE_NAMES,
    AccountRecord,
    FeatureVector,
    NormalizationStats,
    extract_features,
    fit_normalization,
    normalize,
    rank_features_by_entropy,
)
from sybilwalk.graph import (
    LABEL_BENIGN_NODE,
    LABEL_SYBIL_NODE,
    EdgeObservation,
    LabeledSocialGraph,
    build_graph,
    connected_components,
    transition_probability,
)
from sybilwalk.propagation import (
    ScoreVector,
    WalkConfig,
    exact_hitting_probabilities,
    initialize_scores,
    monte_carlo_scores,
    sybilwalk,
)
from sybilwalk.svm import (
    LinearModel,
    TrainConfig,
    decision_value,
    load_model,
    save_model,
    sybil_probability,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "LABEL_BENIGN_NODE",
    "LABEL_SYBIL_NODE",
    "AccountRecord",
    "EdgeObservation",
    "FeatureVector",
    "LabeledSocialGraph",
    "LinearModel",
    "NormalizationStats",
    "ScoreVector",
    "SybilWalkError",
    "TrainConfig",
    "WalkConfig",
    "build_graph",
    "connected_components",
    "decision_value",
    "exact_hitting_probabilities",
    "extract_features",
    "fit_normalization",
    "initialize_scores",
    "load_model",
    "monte_carlo_scores",
    "normalize",
    "rank_features_by_entropy",
    "save_model",
    "sybil_probability",
    "sybilwalk",
    "train",
    "transition_probability",
]
