"""Validation and construction of dense distance matrices."""

import numpy as np

from .errors import InvalidInputError


def check_distance_matrix(D, tol: float = 1e-12) -> np.ndarray:
    """Return ``D`` as a float array after checking it is a valid distance matrix."""
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InvalidInputError(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise InvalidInputError("distance matrix has non-finite entries")
    if np.any(np.abs(D - D.T) > tol):
        raise InvalidInputError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(D)) > tol):
        raise InvalidInputError("distance matrix has a nonzero diagonal")
    if np.any(D < -tol):
        raise InvalidInputError("distance matrix has negative entries")
    return D


def pairwise_euclidean(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
