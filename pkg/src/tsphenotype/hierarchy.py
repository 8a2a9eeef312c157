"""Complete-linkage clustering, dendrogram cuts, classical MDS and cluster summaries."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distances import check_distance_matrix
from .errors import InvalidInputError

DEFAULT_CUT_HEIGHT = 0.3


@dataclass(frozen=True)
class Dendrogram:
    """Merge list in SciPy node numbering: leaves 0..n-1, merge k creates node n + k."""

    merges: tuple  # ((node_a, node_b, height, size), ...)
    n: int

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])

    def to_linkage(self) -> np.ndarray:
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=np.float64)

    def to_dict(self) -> dict:
        return {"n": self.n, "merges": [[int(a), int(b), float(h), int(s)] for a, b, h, s in self.merges]}

    @classmethod
    def from_dict(cls, doc) -> "Dendrogram":
        return cls(tuple((int(a), int(b), float(h), int(s)) for a, b, h, s in doc["merges"]), int(doc["n"]))


def complete_linkage(dist) -> Dendrogram:
    """Agglomerate by maximum pairwise distance.

    Among equally close cluster pairs the lexicographically smallest pair of
    node ids is merged first.
    """
    D = check_distance_matrix(dist)
    n = D.shape[0]
    if n < 2:
        raise InvalidInputError("complete linkage needs at least two points")
    active = list(range(n))          # node ids
    size = {i: 1 for i in range(n)}
    # inter-cluster distances keyed by node id
    dist_to = {i: {j: D[i, j] for j in range(n) if j != i} for i in range(n)}
    merges = []
    next_id = n
    while len(active) > 1:
        best = None
        for x in range(len(active)):
            a = active[x]
            for y in range(x + 1, len(active)):
                b = active[y]
                key = (dist_to[a][b], min(a, b), max(a, b))
                if best is None or key < best:
                    best = key
        h, a, b = best
        merges.append((a, b, float(h), size[a] + size[b]))
        new = next_id
        next_id += 1
        size[new] = size[a] + size[b]
        active = [c for c in active if c not in (a, b)]
        dist_to[new] = {}
        for c in active:
            d = max(dist_to[a][c], dist_to[b][c])
            dist_to[new][c] = d
            dist_to[c][new] = d
            del dist_to[c][a], dist_to[c][b]
        del dist_to[a], dist_to[b]
        active.append(new)
    return Dendrogram(tuple(merges), n)


def _labels_from_merges(dendro: Dendrogram, n_merges: int) -> np.ndarray:
    n = dendro.n
    parent = list(range(n + len(dendro.merges)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k, (a, b, _, _) in enumerate(dendro.merges[:n_merges]):
        parent[find(a)] = n + k
        parent[find(b)] = n + k
    roots = [find(i) for i in range(n)]
    labels = np.empty(n, dtype=np.int64)
    seen = {}
    for i, r in enumerate(roots):  # number clusters by their smallest leaf
        if r not in seen:
            seen[r] = len(seen)
        labels[i] = seen[r]
    return labels


def cut(dendro: Dendrogram, height: float | None = None, count: int | None = None) -> np.ndarray:
    """Flat labels from a height threshold or a target cluster count.

    With ``height`` every merge at or below it is kept. With ``count`` the
    partition is produced by the height cut that yields exactly ``count``
    clusters, or when tied heights make that impossible, the nearest
    attainable count above it.
    """
    if (height is None) == (count is None):
        raise InvalidInputError("give exactly one of height or count")
    heights = dendro.heights
    if height is not None:
        return _labels_from_merges(dendro, int(np.sum(heights <= height)))
    if int(count) != count or count < 1:
        raise InvalidInputError(f"count must be a positive integer, got {count}")
    if count > dendro.n:
        raise InvalidInputError(f"cannot form {count} clusters from {dendro.n} leaves")
    # attainable merge counts are those not followed by a merge at the same height
    attainable = [0] + [k for k in range(1, len(heights) + 1)
                        if k == len(heights) or heights[k] > heights[k - 1]]
    feasible = [k for k in attainable if dendro.n - k >= count]
    return _labels_from_merges(dendro, max(feasible))


def classical_mds(dist, dims: int = 2):
    """Torgerson scaling.

    Returns ``(coords, eigenvalues, truncated)``; ``truncated`` is True when a
    negative eigenvalue among the leading ``dims`` was clipped to zero.
    """
    D = check_distance_matrix(dist)
    n = D.shape[0]
    if int(dims) != dims or dims < 1 or dims > n - 1:
        raise InvalidInputError(f"dims must lie in [1, {n - 1}], got {dims}")
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D ** 2) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    top = evals[:dims]
    truncated = bool(np.any(top < 0))
    if truncated:
        warnings.warn("classical MDS: negative eigenvalues truncated to zero", RuntimeWarning)
    vecs = evecs[:, :dims].copy()
    for j in range(dims):  # deterministic sign
        if vecs[np.argmax(np.abs(vecs[:, j])), j] < 0:
            vecs[:, j] = -vecs[:, j]
    coords = vecs * np.sqrt(np.clip(top, 0.0, None))
    return coords, evals, truncated


@dataclass(frozen=True)
class ClusterStats:
    cluster: int
    count: int
    avg_score: float
    avg_score_sd: float
    frame_sd: float
    frame_sd_sd: float
    severity: float
    severity_sd: float


def _sd(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.std(x, ddof=1)) if x.size > 1 else float("nan")


def summarize_clusters(labels, profiles, severity=None) -> list[ClusterStats]:
    """Per-cluster mean +- SD of subject means, subject frame-SDs and severity (sample SDs)."""
    labels = np.asarray(labels)
    profiles = [np.asarray(p, dtype=np.float64) for p in profiles]
    if len(profiles) != labels.size:
        raise InvalidInputError("labels and profiles must align")
    if severity is not None:
        severity = np.asarray(severity, dtype=np.float64)
        if severity.size != labels.size:
            raise InvalidInputError("labels and severity must align")
    means = np.array([p.mean() for p in profiles])
    sds = np.array([_sd(p) if p.size > 1 else 0.0 for p in profiles])
    out = []
    for c in np.unique(labels):
        mask = labels == c
        if not mask.any():
            warnings.warn(f"cluster {c} is empty and was skipped", RuntimeWarning)
            continue
        sev = severity[mask] if severity is not None else np.array([np.nan])
        out.append(ClusterStats(
            cluster=int(c),
            count=int(mask.sum()),
            avg_score=float(means[mask].mean()),
            avg_score_sd=_sd(means[mask]),
            frame_sd=float(sds[mask].mean()),
            frame_sd_sd=_sd(sds[mask]),
            severity=float(np.mean(sev)),
            severity_sd=_sd(sev) if severity is not None else float("nan"),
        ))
    return out


def write_summary_csv(path, stats) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cluster", "count", "avg_period_score", "avg_period_score_sd",
                    "avg_frame_sd", "avg_frame_sd_sd", "severity", "severity_sd"])
        for s in stats:
            w.writerow([s.cluster, s.count] + [repr(float(v)) for v in (
                s.avg_score, s.avg_score_sd, s.frame_sd, s.frame_sd_sd, s.severity, s.severity_sd)])


def write_dendrogram_json(path, dendro: Dendrogram, ids=None) -> None:
    doc = dendro.to_dict()
    if ids is not None:
        doc["leaves"] = list(ids)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_tidy_csv(path, ids, profiles, labels, frame_numbers=None, covariates=None) -> None:
    """Long format ``subject,frame,score,cluster,<covariates...>`` for external tools."""
    covariates = covariates or {}
    names = sorted({k for row in covariates.values() for k in row})
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "frame", "score", "cluster"] + names)
        for sid, prof, lab in zip(ids, profiles, labels):
            frames = frame_numbers if frame_numbers is not None else range(1, len(prof) + 1)
            cov = covariates.get(sid, {})
            for fr, sc in zip(frames, prof):
                w.writerow([sid, fr, repr(float(sc)), int(lab)] + [cov.get(k, "") for k in names])
