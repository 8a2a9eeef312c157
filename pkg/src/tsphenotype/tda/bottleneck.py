"""Bottleneck distance between persistence diagrams.

Each diagram is augmented with the diagonal projections of the other's
points; the distance is the smallest candidate cost at which the bipartite
graph of admissible matches (l-infinity displacement <= cost) has a perfect
matching. Candidates are all point-to-point l-infinity distances and all
point-to-diagonal distances, so the answer is one of the input-derived
values and exact up to their floating-point evaluation.

Points flagged essential (classes that never die, stored with a capped
death) may only be matched to essential points of the other diagram, never
to the diagonal. Diagrams with different numbers of essential points are at
infinite distance. Plain arrays carry no flags.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from .diagrams import PersistenceDiagram


def _points(d):
    if isinstance(d, PersistenceDiagram):
        return d.pairs, d.essential
    pts = np.asarray(d, dtype=np.float64).reshape(-1, 2)
    return pts, np.zeros(len(pts), dtype=bool)


def _cost_matrix(A: np.ndarray, B: np.ndarray, ess_a=None, ess_b=None) -> np.ndarray:
    """Square cost matrix of the augmented matching problem.

    Rows: A points then diagonal slots for B. Columns: B points then diagonal
    slots for A. A point may only go to its own diagonal slot; diagonal-to-
    diagonal matches are free. Essential points match essential points only.
    """
    na, nb = len(A), len(B)
    ess_a = np.zeros(na, bool) if ess_a is None else np.asarray(ess_a, bool)
    ess_b = np.zeros(nb, bool) if ess_b is None else np.asarray(ess_b, bool)
    size = na + nb
    C = np.full((size, size), np.inf)
    if na and nb:
        block = np.max(np.abs(A[:, None, :] - B[None, :, :]), axis=2)
        block[ess_a[:, None] != ess_b[None, :]] = np.inf
        C[:na, :nb] = block
    half_a = np.where(ess_a, np.inf, np.abs(A[:, 1] - A[:, 0]) / 2.0)
    half_b = np.where(ess_b, np.inf, np.abs(B[:, 1] - B[:, 0]) / 2.0)
    C[np.arange(na), nb + np.arange(na)] = half_a
    C[na + np.arange(nb), np.arange(nb)] = half_b
    C[na:, nb:] = 0.0
    return C


def _has_perfect_matching(allowed: np.ndarray) -> bool:
    """Kuhn's augmenting-path algorithm on a boolean adjacency matrix."""
    size = allowed.shape[0]
    adj = [np.flatnonzero(allowed[i]).tolist() for i in range(size)]
    match_col = [-1] * size

    def augment(u, seen):
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_col[v] < 0 or augment(match_col[v], seen):
                    match_col[v] = u
                    return True
        return False

    for u in range(size):
        if not adj[u] or not augment(u, [False] * size):
            return False
    return True


def bottleneck_distance(a, b) -> float:
    if isinstance(a, PersistenceDiagram) and isinstance(b, PersistenceDiagram):
        if a.kind != b.kind or a.dim != b.dim:
            raise InvalidInputError(
                f"cannot compare a {a.kind} dim-{a.dim} diagram with a {b.kind} dim-{b.dim} one"
            )
    (A, ess_a), (B, ess_b) = _points(a), _points(b)
    if len(A) + len(B) == 0:
        return 0.0
    if ess_a.sum() != ess_b.sum():
        return float("inf")
    C = _cost_matrix(A, B, ess_a, ess_b)
    candidates = np.unique(np.concatenate([[0.0], C[np.isfinite(C)]]))
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(C <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck_matrix(diagrams) -> np.ndarray:
    n = len(diagrams)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = bottleneck_distance(diagrams[i], diagrams[j])
    return M
