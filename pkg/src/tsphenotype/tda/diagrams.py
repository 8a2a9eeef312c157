"""Persistence diagram container, JSON round-trip and the periodicity score."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs in one homological dimension.

    ``kind`` is ``"rips"`` for point-cloud filtrations (death >= birth) or
    ``"superlevel"`` for super-level filtrations of a function, where a pair is
    (max_value, merge_value) and the birth is the larger value.
    """

    dim: int
    pairs: np.ndarray
    essential: np.ndarray
    kind: str = "rips"

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        ess = np.asarray(self.essential, dtype=bool).ravel()
        if ess.size != pairs.shape[0]:
            raise InvalidInputError("essential flags must match the number of pairs")
        if self.kind not in ("rips", "superlevel"):
            raise InvalidInputError(f"unknown diagram kind {self.kind!r}")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "essential", ess)

    def __len__(self):
        return self.pairs.shape[0]

    @property
    def persistence(self) -> np.ndarray:
        return np.abs(self.pairs[:, 1] - self.pairs[:, 0])

    def finite(self) -> np.ndarray:
        return self.pairs[~self.essential]

    def sorted(self) -> "PersistenceDiagram":
        order = np.lexsort((self.pairs[:, 1], self.pairs[:, 0], self.essential))
        return PersistenceDiagram(self.dim, self.pairs[order], self.essential[order], self.kind)

    def to_dict(self) -> dict:
        return {
            "dim": int(self.dim),
            "kind": self.kind,
            "pairs": [[float(b), float(d)] for b, d in self.pairs],
            "essential": [bool(e) for e in self.essential],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PersistenceDiagram":
        return cls(int(doc["dim"]), np.asarray(doc["pairs"], float).reshape(-1, 2),
                   doc["essential"], doc.get("kind", "rips"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PersistenceDiagram":
        return cls.from_dict(json.loads(text))


def empty_diagram(dim: int = 1, kind: str = "rips") -> PersistenceDiagram:
    return PersistenceDiagram(dim, np.empty((0, 2)), np.empty(0, bool), kind)


def periodicity_score(dgm1: PersistenceDiagram) -> float:
    """(death - birth) / sqrt(3) of the most persistent 1-dim class, clamped to [0, 1]."""
    if dgm1.dim != 1:
        raise InvalidInputError(f"periodicity score needs a 1-dim diagram, got dim {dgm1.dim}")
    if len(dgm1) == 0:
        return 0.0
    best = float(np.max(dgm1.pairs[:, 1] - dgm1.pairs[:, 0]))
    return min(1.0, max(0.0, best / SQRT3))
