"""Topological summaries of time series: embeddings, Rips and super-level persistence."""

from .bottleneck import bottleneck_distance, bottleneck_matrix
from .diagrams import PersistenceDiagram, empty_diagram, periodicity_score
from .embedding import (
    EmbeddingConfig,
    maxmin_landmarks,
    pca_reduce,
    select_delay,
    sliding_window_embed,
    standardize_cloud,
)
from .scoring import FrameScore, ScoreConfig, moving_average, score_series
from .rips import rips_from_points, rips_persistence
from .superlevel import superlevel_persistence_0d

__all__ = [
    "EmbeddingConfig",
    "FrameScore",
    "PersistenceDiagram",
    "ScoreConfig",
    "bottleneck_distance",
    "bottleneck_matrix",
    "empty_diagram",
    "maxmin_landmarks",
    "moving_average",
    "pca_reduce",
    "periodicity_score",
    "rips_from_points",
    "rips_persistence",
    "score_series",
    "select_delay",
    "sliding_window_embed",
    "standardize_cloud",
    "superlevel_persistence_0d",
]
