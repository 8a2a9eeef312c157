"""Fuzzy c-medoids over a precomputed distance matrix, with silhouette model selection."""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distances import check_distance_matrix
from .errors import DegenerateInputError, InvalidInputError

DEFAULT_M = 1.5


@dataclass
class FuzzyModel:
    medoid_indices: np.ndarray
    membership: np.ndarray
    m: float
    objective: float
    n_iter: int = 0
    trace: list = field(default_factory=list)
    restart: int = 0

    @property
    def K(self) -> int:
        return int(self.medoid_indices.size)

    @property
    def labels(self) -> np.ndarray:
        return harden(self.membership)


def harden(membership) -> np.ndarray:
    """Row argmax; ties go to the lower cluster index."""
    return np.argmax(np.asarray(membership), axis=1)


def update_membership(D: np.ndarray, medoids, m: float) -> np.ndarray:
    """Optimal memberships for fixed medoids.

    u_ic is proportional to d(i, c)^(-1/(m-1)); computed in log space so that
    m close to 1 does not overflow. A point at distance zero from one or more
    medoids belongs entirely to the first of them.
    """
    d = D[:, medoids]
    n, K = d.shape
    u = np.zeros((n, K))
    zero = d <= 0.0
    hit = zero.any(axis=1)
    u[np.flatnonzero(hit), np.argmax(zero[hit], axis=1)] = 1.0
    rest = ~hit
    if rest.any():
        w = -np.log(d[rest]) / (m - 1.0)
        w -= w.max(axis=1, keepdims=True)
        e = np.exp(w)
        u[rest] = e / e.sum(axis=1, keepdims=True)
    return u


def objective(D: np.ndarray, medoids, u: np.ndarray, m: float) -> float:
    return float(np.sum(u ** m * D[:, medoids]))


def update_medoids(D: np.ndarray, medoids, u: np.ndarray, m: float) -> np.ndarray:
    """Per-cluster argmin of sum_i u_ic^m d(x_i, x) over candidate points x.

    Points currently serving as another cluster's medoid are excluded, which
    keeps the medoids distinct and lets each cluster keep its current medoid,
    so the objective cannot increase.
    """
    new = np.array(medoids, copy=True)
    costs = (u ** m).T @ D  # K x n
    for c in range(new.size):
        cost = costs[c].copy()
        others = np.delete(new, c)
        cost[others] = np.inf
        new[c] = int(np.argmin(cost))
    return new


def _run(D, init, m, max_iter):
    medoids = np.array(init, dtype=np.int64)
    u = update_membership(D, medoids, m)
    trace = [objective(D, medoids, u, m)]
    it = 0
    for it in range(1, max_iter + 1):
        new = update_medoids(D, medoids, u, m)
        trace.append(objective(D, new, u, m))
        unchanged = np.array_equal(np.sort(new), np.sort(medoids))
        medoids = new
        u = update_membership(D, medoids, m)
        trace.append(objective(D, medoids, u, m))
        if unchanged:
            break
    return medoids, u, trace, it


def fuzzy_c_medoids(
    dist,
    K: int,
    m: float = DEFAULT_M,
    restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
    init: str = "random",
) -> FuzzyModel:
    """Krishnapuram-style fuzzy c-medoids with seeded random restarts.

    ``init="all"`` replaces random restarts by every K-subset of points as a
    starting medoid set (only sensible for tiny n).
    """
    D = check_distance_matrix(dist)
    n = D.shape[0]
    if int(K) != K or K < 2:
        raise InvalidInputError(f"K must be an integer >= 2, got {K}")
    if K > n:
        raise InvalidInputError(f"K={K} exceeds the number of points {n}")
    if not m > 1:
        raise InvalidInputError(f"fuzziness m must exceed 1, got {m}")
    if restarts < 1 or max_iter < 1:
        raise InvalidInputError("restarts and max_iter must be positive")
    if np.all(D == 0.0):
        raise DegenerateInputError("all points are identical")

    if init == "all":
        starts = [np.array(c) for c in itertools.combinations(range(n), K)]
    elif init == "random":
        rng = np.random.default_rng(seed)
        starts = [rng.choice(n, size=K, replace=False) for _ in range(restarts)]
    else:
        raise InvalidInputError(f"unknown init {init!r}")

    best = None
    for r, start in enumerate(starts):
        medoids, u, trace, it = _run(D, start, m, max_iter)
        obj = trace[-1]
        if best is None or obj < best.objective:
            best = FuzzyModel(medoids, u, float(m), obj, it, trace, r)
    return best


def silhouette(dist, labels) -> float:
    """Mean silhouette of a hard partition; points in singleton clusters score 0."""
    D = check_distance_matrix(dist)
    labels = np.asarray(labels)
    if labels.size != D.shape[0]:
        raise InvalidInputError("labels length does not match the distance matrix")
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise InvalidInputError("silhouette needs at least two clusters")
    n = labels.size
    scores = np.zeros(n)
    masks = {c: labels == c for c in clusters}
    for i in range(n):
        own = masks[labels[i]]
        size = own.sum()
        if size == 1:
            continue
        a = D[i, own].sum() / (size - 1)
        b = min(D[i, masks[c]].mean() for c in clusters if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def select_k(dist, k_min: int = 2, k_max: int = 6, m: float = DEFAULT_M,
             restarts: int = 20, seed: int = 0, max_iter: int = 100):
    """Pick K by maximal silhouette of the hardened memberships (ties -> smaller K).

    Returns ``(K, scores, models)`` with ``scores`` and ``models`` keyed by K.
    """
    D = check_distance_matrix(dist)
    n = D.shape[0]
    if k_min < 2 or k_max > n - 1 or k_min > k_max:
        raise InvalidInputError(f"K range [{k_min}, {k_max}] must lie within [2, {n - 1}]")
    scores, models = {}, {}
    for K in range(k_min, k_max + 1):
        model = fuzzy_c_medoids(D, K, m, restarts, max_iter, seed)
        labels = model.labels
        scores[K] = silhouette(D, labels) if np.unique(labels).size > 1 else -1.0
        models[K] = model
    best = max(scores, key=lambda k: (scores[k], -k))
    return best, scores, models


def write_membership_csv(path, ids, membership) -> None:
    membership = np.asarray(membership)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"u_{c + 1}" for c in range(membership.shape[1])])
        for sid, row in zip(ids, membership):
            w.writerow([sid] + [repr(float(v)) for v in row])


def read_membership_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        ids, rows = [], []
        for r in reader:
            ids.append(r[0])
            rows.append([float(v) for v in r[1:]])
    return ids, np.asarray(rows)


def model_summary(model: FuzzyModel, ids) -> dict:
    return {
        "K": model.K,
        "m": model.m,
        "objective": model.objective,
        "medoid_indices": [int(i) for i in model.medoid_indices],
        "medoid_ids": [ids[int(i)] for i in model.medoid_indices],
        "n_iter": model.n_iter,
        "restart": model.restart,
    }


def write_model_json(path, model: FuzzyModel, ids, extra=None) -> None:
    doc = model_summary(model, ids)
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
