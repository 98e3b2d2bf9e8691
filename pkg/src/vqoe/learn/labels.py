"""Three-class QoE labels from MOS and the threshold grid search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, LengthMismatch

LABELS = ("bad", "average", "good")
# thresholds live on k / 20 for k in 21..99, i.e. 1.05 .. 4.95 in 0.05 steps
GRID_K = np.arange(21, 100)
GRID = GRID_K / 20.0


@dataclass(frozen=True)
class ClassThresholds:
    m1: float
    m2: float

    def __post_init__(self):
        if not 1.0 < self.m1 < self.m2 < 5.0:
            raise ValueError(f"need 1 < m1 < m2 < 5, got m1={self.m1}, m2={self.m2}")

    def classify(self, mos) -> np.ndarray:
        """0 = bad (mos < m1), 1 = average, 2 = good (mos >= m2)."""
        mos = np.asarray(mos, dtype=np.float64)
        return (mos >= self.m1).astype(np.int64) + (mos >= self.m2)

    def label(self, mos: float) -> str:
        return LABELS[int(self.classify(mos))]


def search_thresholds(true_mos, predicted_mos) -> ClassThresholds:
    """Pick (m1, m2) on the 0.05 grid maximising 3-class agreement.

    Both lists are labelled with the same candidate pair and the pair with
    the most matching labels wins; ties go to the smallest m1, then the
    smallest m2.
    """
    t = np.asarray(true_mos, dtype=np.float64).ravel()
    p = np.asarray(predicted_mos, dtype=np.float64).ravel()
    if len(t) != len(p):
        raise LengthMismatch(f"{len(t)} true scores vs {len(p)} predictions")
    if len(t) == 0:
        raise EmptyInput("no scores to threshold")
    ge_t = (t[None, :] >= GRID[:, None]).astype(np.int8)
    ge_p = (p[None, :] >= GRID[:, None]).astype(np.int8)
    best, best_ab = -1, None
    g = len(GRID)
    for a in range(g - 1):
        lab_t = ge_t[a] + ge_t[a + 1 :]
        lab_p = ge_p[a] + ge_p[a + 1 :]
        hits = (lab_t == lab_p).sum(axis=1)
        b = int(np.argmax(hits))
        if hits[b] > best:
            best, best_ab = int(hits[b]), (a, a + 1 + b)
    a, b = best_ab
    return ClassThresholds(float(GRID[a]), float(GRID[b]))


def threshold_accuracy(true_mos, predicted_mos, th: ClassThresholds) -> float:
    t, p = th.classify(true_mos), th.classify(predicted_mos)
    return float((t == p).mean())
