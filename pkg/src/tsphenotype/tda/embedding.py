"""Sliding-window embedding, delay selection, cloud standardisation, PCA and landmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidInputError
from ..tsfeatures import acf

DEFAULT_DIMENSION = 14
DEFAULT_POINTS = 1200
DEFAULT_MAX_DELAY = 64


@dataclass(frozen=True)
class EmbeddingConfig:
    dimension: int = DEFAULT_DIMENSION  # p; rows have p + 1 coordinates
    delay: int = 1                      # tau, in samples
    points: int = DEFAULT_POINTS        # number of rows

    def __post_init__(self):
        for name in ("dimension", "delay", "points"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v}")

    @property
    def span(self) -> int:
        return self.dimension * self.delay


def sliding_window_embed(series, cfg: EmbeddingConfig) -> np.ndarray:
    """Trajectory matrix: row i is (x_i, x_{i+tau}, ..., x_{i+p tau})."""
    x = np.asarray(getattr(series, "values", series), dtype=np.float64).ravel()
    need = cfg.points + cfg.span
    if x.size < need:
        raise InvalidInputError(
            f"series of length {x.size} too short for {cfg.points} windows spanning {cfg.span}"
        )
    idx = np.arange(cfg.points)[:, None] + cfg.delay * np.arange(cfg.dimension + 1)[None, :]
    return x[idx]


def select_delay(series, max_lag: int = DEFAULT_MAX_DELAY) -> int:
    """Delay from the autocorrelation of ``series``.

    The smallest lag whose |acf| falls below 2/sqrt(T) wins; failing that,
    the lag in [1, max_lag] with the smallest nonzero |acf|.
    """
    x = np.asarray(getattr(series, "values", series), dtype=np.float64).ravel()
    r = np.abs(acf(x, max_lag).values)
    band = 2.0 / np.sqrt(x.size)
    below = np.flatnonzero(r < band)
    if below.size:
        return int(below[0]) + 1
    nonzero = np.flatnonzero(r > 0)
    if nonzero.size == 0:
        raise DegenerateInputError("autocorrelation vanishes at every lag")
    return int(nonzero[np.argmin(r[nonzero])]) + 1


def standardize_cloud(cloud):
    """Centre each row on its own mean and scale it to unit Euclidean norm.

    Returns ``(standardized, degenerate)`` where ``degenerate`` flags rows that
    were constant; those rows are mapped to the zero vector.
    """
    X = np.asarray(cloud, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInputError("point cloud must be a nonempty 2-d array")
    centred = X - X.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centred, axis=1)
    scale = np.abs(X).max(axis=1)
    degenerate = norms <= 1e-14 * np.maximum(scale, 1e-300)
    out = np.zeros_like(centred)
    ok = ~degenerate
    out[ok] = centred[ok] / norms[ok, None]
    return out, degenerate


def pca_reduce(cloud, k: int) -> np.ndarray:
    """Project column-centred data on its top-k principal axes.

    Each axis is signed so its largest-magnitude loading is positive.
    """
    X = np.asarray(cloud, dtype=np.float64)
    d = X.shape[1]
    if int(k) != k or k < 1 or k > d:
        raise InvalidInputError(f"k={k} must lie in [1, {d}]")
    Xc = X - X.mean(axis=0)
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    V = Vt[:k].T
    for j in range(k):
        if V[np.argmax(np.abs(V[:, j])), j] < 0:
            V[:, j] = -V[:, j]
    return Xc @ V


def maxmin_landmarks(cloud, count: int, seed=0) -> np.ndarray:
    """Greedy farthest-point subsample; first index seeded, ties to the lowest index."""
    X = np.asarray(cloud, dtype=np.float64)
    n = X.shape[0]
    if count < 1:
        raise InvalidInputError("landmark count must be positive")
    if count >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    mind = np.linalg.norm(X - X[chosen[0]], axis=1)
    for _ in range(count - 1):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, np.linalg.norm(X - X[nxt], axis=1))
    return np.asarray(chosen)
