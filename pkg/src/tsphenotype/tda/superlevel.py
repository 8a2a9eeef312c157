"""0-dimensional persistence of the super-level filtration of a sampled function."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from .diagrams import PersistenceDiagram


def superlevel_persistence_0d(values) -> PersistenceDiagram:
    """Pairs (max_value, merge_value) from sweeping {i : f(i) >= h} downward.

    Samples enter in decreasing value (ties left to right) and join adjacent
    samples already present. A sample with no present neighbour starts a
    component at a local maximum; when two components meet, the one born at
    the lower maximum dies at the current value (equal maxima: the rightmost
    one dies, so plateaus are represented by their leftmost index). The last
    component is paired with the global minimum and flagged essential.
    """
    f = np.asarray(values, dtype=np.float64).ravel()
    if f.size == 0:
        raise InvalidInputError("super-level persistence needs at least one value")
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("values must be finite")
    n = f.size
    order = np.lexsort((np.arange(n), -f))
    parent = np.full(n, -1, dtype=np.int64)   # -1: not yet in the super-level set
    birth_idx = np.zeros(n, dtype=np.int64)   # root -> index of its maximum

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def older(a, b):
        """True if root a's component was born before root b's."""
        ia, ib = birth_idx[a], birth_idx[b]
        return (f[ia], -ia) > (f[ib], -ib)

    pairs = []
    for v in order:
        v = int(v)
        parent[v] = v
        birth_idx[v] = v
        for w in (v - 1, v + 1):
            if 0 <= w < n and parent[w] >= 0:
                rv, rw = find(v), find(w)
                if rv == rw:
                    continue
                keep, die = (rv, rw) if older(rv, rw) else (rw, rv)
                peak = f[birth_idx[die]]
                if peak > f[v]:
                    pairs.append((float(peak), float(f[v])))
                parent[die] = keep
    pairs.sort(key=lambda p: (-p[0], -p[1]))
    pairs.append((float(f.max()), float(f.min())))
    essential = [False] * (len(pairs) - 1) + [True]
    return PersistenceDiagram(0, np.array(pairs), essential, kind="superlevel")
