"""Periodicity score of one series: embed, standardize, reduce, landmark, Rips."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError
from .diagrams import PersistenceDiagram, empty_diagram, periodicity_score
from .embedding import (
    DEFAULT_DIMENSION,
    DEFAULT_MAX_DELAY,
    EmbeddingConfig,
    maxmin_landmarks,
    pca_reduce,
    select_delay,
    sliding_window_embed,
    standardize_cloud,
)
from .rips import rips_from_points

DEFAULT_LANDMARKS = 150
DEFAULT_MAX_SCALE = 2.0  # diameter of a standardized cloud is at most 2


@dataclass(frozen=True)
class ScoreConfig:
    dimension: int = DEFAULT_DIMENSION
    points: int | None = None        # None: every window the series allows
    max_delay: int = DEFAULT_MAX_DELAY
    delay: int | None = None         # None: chosen from the autocorrelation
    pca_components: int = 2          # 0 keeps the full (p+1)-dimensional cloud
    landmarks: int = DEFAULT_LANDMARKS  # 0 uses every point
    max_scale: float = DEFAULT_MAX_SCALE
    smooth_window: int = 1           # moving-average length applied before embedding; 1 = off
    seed: int = 0

    def __post_init__(self):
        if self.smooth_window < 1 or int(self.smooth_window) != self.smooth_window:
            raise InvalidInputError("smooth_window must be a positive integer")
        if self.pca_components < 0 or self.landmarks < 0:
            raise InvalidInputError("pca_components and landmarks must be nonnegative")
        if not self.max_scale > 0:
            raise InvalidInputError("max_scale must be positive")


@dataclass(frozen=True)
class FrameScore:
    score: float
    delay: int
    diagram: PersistenceDiagram
    degenerate: bool = False


def moving_average(x, window: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if window <= 1:
        return x
    return np.convolve(x, np.ones(window) / window, mode="valid")


def score_series(series, cfg: ScoreConfig = ScoreConfig()) -> FrameScore:
    """Periodicity score of the most persistent loop in the delay embedding.

    A constant series (or one whose windows are all constant) has no loop and
    scores 0 with ``degenerate=True``.
    """
    x = moving_average(getattr(series, "values", series), cfg.smooth_window)
    if x.size < 2 or np.ptp(x) == 0:
        return FrameScore(0.0, cfg.delay or 1, empty_diagram(1), True)
    if cfg.delay is not None:
        tau = int(cfg.delay)
    else:
        try:
            tau = select_delay(x, min(cfg.max_delay, x.size - 1))
        except DegenerateInputError:
            return FrameScore(0.0, 1, empty_diagram(1), True)
    span = cfg.dimension * tau
    points = cfg.points if cfg.points is not None else x.size - span
    if points < 3:
        raise InvalidInputError(f"series of length {x.size} too short for window span {span}")
    cloud = sliding_window_embed(x, EmbeddingConfig(cfg.dimension, tau, points))
    cloud, flagged = standardize_cloud(cloud)
    if flagged.all():
        return FrameScore(0.0, tau, empty_diagram(1), True)
    if cfg.pca_components:
        cloud = pca_reduce(cloud, min(cfg.pca_components, cloud.shape[1]))
    if cfg.landmarks:
        cloud = cloud[maxmin_landmarks(cloud, cfg.landmarks, cfg.seed)]
    dgm = rips_from_points(cloud, 1, cfg.max_scale)[1]
    return FrameScore(periodicity_score(dgm), tau, dgm, False)
