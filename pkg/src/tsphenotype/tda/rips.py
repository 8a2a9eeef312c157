"""Vietoris-Rips persistence in dimensions 0 and 1.

Scale is the diameter: an edge enters at its length, a triangle at its
longest edge. Dimension 0 is computed by union-find over sorted edges.
Dimension 1 reduces the coboundary matrix of the edges (the anti-transpose
of the edge/triangle boundary matrix) over Z/2, processing edges from last
to first and skipping edges already paired in dimension 0. The diagrams are
identical to those of plain boundary-matrix reduction; the coboundary form
lets most columns pair immediately.
"""

from __future__ import annotations

import numpy as np

from ..distances import check_distance_matrix, pairwise_euclidean
from ..errors import InvalidInputError
from .diagrams import PersistenceDiagram


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        """Merge and return True if a and b were in different components."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # every vertex is born at 0, so the elder rule reduces to lowest index
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def _sorted_edges(D, max_scale):
    n = D.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    lengths = D[ii, jj]
    keep = lengths <= max_scale
    ii, jj, lengths = ii[keep], jj[keep], lengths[keep]
    order = np.lexsort((jj, ii, lengths))
    return ii[order], jj[order], lengths[order]


def rips_persistence(dist, max_dim: int = 1, max_scale: float = np.inf) -> dict:
    """Persistence diagrams ``{0: dgm0, 1: dgm1}`` of the Rips filtration of ``dist``.

    Pairs with zero persistence are dropped. Classes still alive at
    ``max_scale`` are reported with death ``max_scale`` and flagged essential;
    with an infinite ``max_scale`` the scale is capped at the largest distance.
    """
    D = check_distance_matrix(dist)
    if max_dim not in (0, 1):
        raise InvalidInputError(f"max_dim must be 0 or 1, got {max_dim}")
    if not max_scale > 0:
        raise InvalidInputError(f"max_scale must be positive, got {max_scale}")
    n = D.shape[0]
    if not np.isfinite(max_scale):
        max_scale = float(D.max()) if n > 1 else 0.0
    ei, ej, lengths = _sorted_edges(D, max_scale)
    m = lengths.size

    uf = _UnionFind(n)
    negative = np.zeros(m, dtype=bool)
    pairs0 = []
    for r in range(m):
        if uf.union(int(ei[r]), int(ej[r])):
            negative[r] = True
            if lengths[r] > 0:
                pairs0.append((0.0, float(lengths[r])))
    n_components = len({uf.find(v) for v in range(n)})
    ess0 = [False] * len(pairs0) + [True] * n_components
    pairs0 += [(0.0, float(max_scale))] * n_components
    result = {0: PersistenceDiagram(0, np.array(pairs0).reshape(-1, 2), ess0)}
    if max_dim == 0:
        return result

    rank = np.full((n, n), -1, dtype=np.int64)
    rank[ei, ej] = np.arange(m)
    rank[ej, ei] = np.arange(m)

    def coboundary(r):
        i, j = int(ei[r]), int(ej[r])
        ri, rj = rank[i], rank[j]
        valid = (ri >= 0) & (rj >= 0)
        valid[i] = valid[j] = False
        ks = np.flatnonzero(valid)
        a, b = ri[ks], rj[ks]
        top = np.maximum(np.maximum(a, b), r)
        third = np.where(top == r, ks, np.where(top == a, j, i))
        # a triangle is identified by its longest edge and the opposite vertex;
        # this key orders triangles compatibly with the filtration
        return top * n + third

    pivot_owner = {}   # triangle key -> edge rank whose reduced column has that pivot
    reduced = {}       # edge rank -> reduced column, only when it differs from the coboundary
    pairs1, ess1 = [], []
    for r in range(m - 1, -1, -1):
        if negative[r]:
            continue
        col = coboundary(r)
        changed = False
        if col.size and int(col.min()) in pivot_owner:
            col = np.sort(col)   # reduced columns are kept as sorted key arrays
        while col.size and int(col[0]) in pivot_owner:
            owner = pivot_owner[int(col[0])]
            other = reduced.get(owner)
            if other is None:
                other = np.sort(coboundary(owner))
            col = np.setxor1d(col, other, assume_unique=True)
            changed = True
        pivot = (int(col[0]) if changed else int(col.min())) if col.size else None
        birth = float(lengths[r])
        if pivot is None:
            if birth < max_scale:
                pairs1.append((birth, float(max_scale)))
                ess1.append(True)
            continue
        pivot_owner[pivot] = r
        if changed:
            reduced[r] = col
        death = float(lengths[pivot // n])
        if death > birth:
            pairs1.append((birth, death))
            ess1.append(False)
    result[1] = PersistenceDiagram(1, np.array(pairs1).reshape(-1, 2), ess1)
    return result


def rips_from_points(points, max_dim: int = 1, max_scale: float = np.inf) -> dict:
    return rips_persistence(pairwise_euclidean(points), max_dim, max_scale)
