"""Supervised discretization of numeric features.

The default is Fayyad & Irani's recursive minimum-entropy splitting with the
MDL stopping rule; an unsupervised equal-frequency binning is kept for
ablation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import UnknownFeature

# slack for comparing candidate entropies; keeps tie-breaking stable
TIE_EPS = 1e-12


@dataclass(frozen=True)
class CutPoints:
    feature: str
    thresholds: tuple[float, ...]

    def bins(self, values) -> np.ndarray:
        """Bin index per value; a value equal to a threshold goes left."""
        return np.searchsorted(np.asarray(self.thresholds), np.asarray(values), side="left")

    @property
    def n_bins(self) -> int:
        return len(self.thresholds) + 1


def _class_entropy(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _xlogx(c):
    c = np.asarray(c, dtype=np.float64)
    out = np.zeros_like(c)
    nz = c > 0
    out[nz] = c[nz] * np.log2(c[nz])
    return out


def _midpoint(a: float, b: float) -> float:
    m = (a + b) / 2.0
    # rounding can land on b for adjacent floats; keep b on the right side
    return a if m >= b else m


def _mdl_recurse(v, y, n_classes, out):
    n = v.size
    if n < 2:
        return
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    total = left[-1] + onehot[-1]
    boundaries = np.flatnonzero(v[1:] > v[:-1])
    if boundaries.size == 0:
        return
    lcs = left[boundaries]
    rcs = total - lcs
    nl = lcs.sum(axis=1)
    nr = n - nl
    ents = (_xlogx(nl) - _xlogx(lcs).sum(axis=1) + _xlogx(nr) - _xlogx(rcs).sum(axis=1)) / n
    best_e = ents.min()
    pos = int(np.flatnonzero(ents <= best_e + TIE_EPS)[0])
    best_i = int(boundaries[pos])

    lc = left[best_i]
    rc = total - lc
    ent_s = _class_entropy(total)
    ent_l = _class_entropy(lc)
    ent_r = _class_entropy(rc)
    gain = ent_s - best_e
    k = int((total > 0).sum())
    k1 = int((lc > 0).sum())
    k2 = int((rc > 0).sum())
    delta = math.log2(3**k - 2) - (k * ent_s - k1 * ent_l - k2 * ent_r)
    if gain <= (math.log2(n - 1) + delta) / n:
        return
    split = best_i + 1
    out.append(_midpoint(v[best_i], v[split]))
    _mdl_recurse(v[:split], y[:split], n_classes, out)
    _mdl_recurse(v[split:], y[split:], n_classes, out)


def mdl_cut_points(values, labels, n_classes: int = 2) -> tuple[float, ...]:
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    keep = ~np.isnan(values)
    values, labels = values[keep], labels[keep]
    order = np.argsort(values, kind="stable")
    out: list[float] = []
    _mdl_recurse(values[order], labels[order], n_classes, out)
    return tuple(sorted(out))


def equal_frequency_cut_points(values, n_bins: int = 10) -> tuple[float, ...]:
    v = np.sort(np.asarray(values, dtype=np.float64))
    v = v[~np.isnan(v)]
    n = v.size
    cuts = set()
    for b in range(1, n_bins):
        pos = int(round(b * n / n_bins))
        if 0 < pos < n and v[pos - 1] < v[pos]:
            cuts.add(_midpoint(v[pos - 1], v[pos]))
    return tuple(sorted(cuts))


def mdl_discretize(ds: Dataset, feature: str) -> CutPoints:
    if feature not in ds.names:
        raise UnknownFeature(feature)
    return CutPoints(feature, mdl_cut_points(ds.column(feature), ds.y))


def equal_frequency_discretize(ds: Dataset, feature: str, n_bins: int = 10) -> CutPoints:
    if feature not in ds.names:
        raise UnknownFeature(feature)
    return CutPoints(feature, equal_frequency_cut_points(ds.column(feature), n_bins))
