"""Linguistic terms: uniform triangular partitions and trapezoids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import LabelOutOfRange

ALLOWED_LABEL_COUNTS = (3, 5, 7)


@dataclass(frozen=True)
class FuzzyPartition:
    """Uniform triangles over [lo, hi]; the outer two are shouldered.

    Adjacent triangles cross at 0.5, so memberships sum to one everywhere.
    A constant feature gets a single label with membership 1.
    """

    feature: str
    lo: float
    hi: float
    n_labels: int

    def __post_init__(self):
        if self.n_labels < 1:
            raise ValueError("a partition needs at least one label")
        if self.n_labels > 1 and not self.lo < self.hi:
            raise ValueError(f"{self.feature}: need lo < hi for {self.n_labels} labels")

    @property
    def centers(self) -> np.ndarray:
        if self.n_labels == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.n_labels)

    def triangle(self, label: int) -> tuple[float, float, float]:
        """(left foot, apex, right foot); shouldered sides are infinite."""
        c = self.centers
        left = -math.inf if label == 0 else float(c[label - 1])
        right = math.inf if label == self.n_labels - 1 else float(c[label + 1])
        return left, float(c[label]), right

    def memberships(self, x) -> np.ndarray:
        """Membership matrix of shape (len(x), n_labels)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if self.n_labels == 1:
            return np.ones((x.size, 1))
        step = (self.hi - self.lo) / (self.n_labels - 1)
        t = (np.clip(x, self.lo, self.hi) - self.lo) / step
        return np.maximum(0.0, 1.0 - np.abs(t[:, None] - np.arange(self.n_labels)[None, :]))

    def membership(self, label: int, x: float) -> float:
        if not 0 <= label < self.n_labels:
            raise LabelOutOfRange(f"label {label} outside 0..{self.n_labels - 1}")
        return float(self.memberships([x])[0, label])

    def best_labels(self, x) -> np.ndarray:
        """Label of maximal membership; ties go to the lower label."""
        return np.argmax(self.memberships(x), axis=1)


def membership(p: FuzzyPartition, label: int, x: float) -> float:
    return p.membership(label, x)


def build_uniform_partitions(ds: Dataset, n_labels: int = 5) -> dict[str, FuzzyPartition]:
    if n_labels not in ALLOWED_LABEL_COUNTS:
        raise ValueError(f"n_labels must be one of {ALLOWED_LABEL_COUNTS}")
    out = {}
    for j, name in enumerate(ds.names):
        col = ds.X[:, j]
        col = col[~np.isnan(col)]
        lo = float(col.min()) if col.size else 0.0
        hi = float(col.max()) if col.size else 0.0
        out[name] = FuzzyPartition(name, lo, hi, n_labels if lo < hi else 1)
    return out


@dataclass(frozen=True)
class Trapezoid:
    """Membership 1 on [core_lo, core_hi], linear to 0 at the support ends.

    Infinite bounds describe one-sided intervals.
    """

    support_lo: float
    core_lo: float
    core_hi: float
    support_hi: float

    def __post_init__(self):
        if not (self.support_lo <= self.core_lo <= self.core_hi <= self.support_hi):
            raise ValueError(f"malformed trapezoid {self}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape)
        core = (x >= self.core_lo) & (x <= self.core_hi)
        out[core] = 1.0
        if math.isfinite(self.support_lo) and self.support_lo < self.core_lo:
            left = (x > self.support_lo) & (x < self.core_lo)
            out[left] = (x[left] - self.support_lo) / (self.core_lo - self.support_lo)
        if math.isfinite(self.support_hi) and self.core_hi < self.support_hi:
            right = (x > self.core_hi) & (x < self.support_hi)
            out[right] = (self.support_hi - x[right]) / (self.support_hi - self.core_hi)
        return out

    def core_contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x >= self.core_lo) & (x <= self.core_hi)
