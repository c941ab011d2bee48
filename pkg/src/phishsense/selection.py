"""Filter feature selection: Information Gain and ReliefF rankings, top-k
selection and union/intersection of the selected sets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Dataset, impute, rng_for
from .discretize import equal_frequency_cut_points, mdl_cut_points
from .errors import EmptyInput, KOutOfRange, SchemaMismatch, TooFewRowsPerClass, UnknownFeature

METHOD_PREFIX = {"infogain": "ig", "relieff": "rf"}


def entropy(labels) -> float:
    """Shannon entropy (bits) of a label vector."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise EmptyInput("entropy of an empty label vector")
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    h = float(-(p * np.log2(p)).sum())
    return h if h > 0 else 0.0


def conditional_entropy(bins, labels) -> float:
    bins = np.asarray(bins)
    labels = np.asarray(labels)
    n = labels.size
    total = 0.0
    for b in np.unique(bins):
        sel = labels[bins == b]
        total += sel.size / n * entropy(sel)
    return total


@dataclass(frozen=True)
class FeatureRanking:
    method: str
    scores: tuple[tuple[str, float], ...]

    @classmethod
    def from_scores(cls, method: str, names: Sequence[str], scores) -> "FeatureRanking":
        """Order descending by score; equal scores keep schema order."""
        scores = [float(s) for s in scores]
        order = sorted(range(len(names)), key=lambda i: (-scores[i], i))
        return cls(method, tuple((names[i], scores[i]) for i in order))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.scores)

    def score(self, name: str) -> float:
        for n, s in self.scores:
            if n == name:
                return s
        raise UnknownFeature(name)

    def __len__(self):
        return len(self.scores)

    def to_text(self, limit: int | None = None) -> str:
        rows = self.scores if limit is None else self.scores[:limit]
        return "".join(f"{n}\t{s!r}\n" for n, s in rows)

    @classmethod
    def from_text(cls, text: str, method: str = "unknown") -> "FeatureRanking":
        rows = []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            name, _, score = line.rpartition("\t")
            rows.append((name, float(score)))
        return cls(method, tuple(rows))


@dataclass(frozen=True)
class FeatureSet:
    names: tuple[str, ...]
    provenance: str = "explicit"
    universe: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature set contains duplicates")
        if self.universe is not None:
            object.__setattr__(self, "universe", tuple(self.universe))
            known = set(self.universe)
            for n in self.names:
                if n not in known:
                    raise UnknownFeature(n)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self.names

    def to_text(self) -> str:
        return "".join(f"{n}\n" for n in self.names)

    @classmethod
    def from_text(cls, text: str, provenance: str = "explicit", universe=None) -> "FeatureSet":
        names = [ln.strip() for ln in text.splitlines()]
        names = [n for n in names if n and not n.startswith("#")]
        # a ranking file is accepted too: keep the name column
        names = [n.split("\t")[0] for n in names]
        return cls(tuple(names), provenance, universe)

    @classmethod
    def read(cls, path, universe=None) -> "FeatureSet":
        p = Path(path)
        return cls.from_text(p.read_text(encoding="utf-8"), p.stem, universe)


def all_features(ds: Dataset) -> FeatureSet:
    return FeatureSet(ds.names, "all", ds.names)


def information_gain(values, labels, discretizer: str = "mdl") -> float:
    labels = np.asarray(labels)
    if discretizer == "mdl":
        cuts = mdl_cut_points(values, labels)
    elif discretizer == "equal-frequency":
        cuts = equal_frequency_cut_points(values)
    else:
        raise ValueError(f"unknown discretizer {discretizer!r}")
    h = entropy(labels)
    if not cuts:
        return 0.0
    bins = np.searchsorted(np.asarray(cuts), np.asarray(values, dtype=np.float64), side="left")
    ig = h - conditional_entropy(bins, labels)
    return min(max(ig, 0.0), h)


def rank_infogain(ds: Dataset, discretizer: str = "mdl") -> FeatureRanking:
    if ds.n_rows == 0:
        raise EmptyInput("cannot rank features of an empty dataset")
    ds, _ = impute(ds)
    scores = [information_gain(ds.X[:, j], ds.y, discretizer) for j in range(ds.n_features)]
    return FeatureRanking.from_scores("infogain", ds.names, scores)


def _nearest(dist: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """The k candidates closest by distance; equal distances go to the lower row index."""
    d = dist[candidates]
    if candidates.size > k:
        kth = np.partition(d, k - 1)[k - 1]
        keep = d <= kth
        candidates, d = candidates[keep], d[keep]
    order = np.lexsort((candidates, d))
    return candidates[order[:k]]


def relieff_weights(X, y, k_neighbors: int = 10, sample_rows=None) -> np.ndarray:
    """ReliefF weights for a numeric matrix.

    Differences are |a - b| scaled by the feature's range; distance is the
    Manhattan sum of those differences. ``sample_rows`` defaults to every row.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, m = X.shape
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    scale = np.where(span > 0, span, 1.0)
    Xn = np.where(span > 0, (X - lo) / scale, 0.0)

    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2 or (counts <= k_neighbors).any():
        raise TooFewRowsPerClass(
            f"ReliefF with k={k_neighbors} needs more than {k_neighbors} rows in every class"
        )
    prior = dict(zip(classes.tolist(), (counts / n).tolist()))
    members = {c: np.flatnonzero(y == c) for c in classes.tolist()}

    if sample_rows is None:
        sample_rows = np.arange(n)
    sample_rows = np.asarray(sample_rows)
    m_samples = sample_rows.size

    w = np.zeros(m)
    for i in sample_rows:
        ci = y[i].item()
        delta = np.abs(Xn - Xn[i])
        dist = delta.sum(axis=1)
        same = members[ci]
        hits = _nearest(dist, same[same != i], k_neighbors)
        w -= delta[hits].sum(axis=0) / (m_samples * k_neighbors)
        for c, rows in members.items():
            if c == ci:
                continue
            misses = _nearest(dist, rows, k_neighbors)
            factor = prior[c] / (1.0 - prior[ci])
            w += factor * delta[misses].sum(axis=0) / (m_samples * k_neighbors)
    return w


def rank_relieff(
    ds: Dataset, k_neighbors: int = 10, sample_count: int | str = "all", seed: int = 42
) -> FeatureRanking:
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    ds, _ = impute(ds)
    if sample_count == "all" or sample_count is None or int(sample_count) >= ds.n_rows:
        rows = None
    else:
        rows = rng_for(seed).choice(ds.n_rows, size=int(sample_count), replace=False)
    w = relieff_weights(ds.X, ds.y, k_neighbors, rows)
    return FeatureRanking.from_scores("relieff", ds.names, w)


def top_k(r: FeatureRanking, k: int, universe=None) -> FeatureSet:
    if not 1 <= k <= len(r):
        raise KOutOfRange(f"k={k} outside 1..{len(r)}")
    prefix = METHOD_PREFIX.get(r.method, r.method)
    if universe is None:
        universe = r.names
    return FeatureSet(r.names[:k], f"{prefix}-top{k}", tuple(universe))


def combine(a: FeatureSet, b: FeatureSet, mode: str) -> FeatureSet:
    """Union keeps a's order then b's unseen names; intersection keeps a's order."""
    if a.universe is not None and b.universe is not None and set(a.universe) != set(b.universe):
        raise SchemaMismatch("feature sets come from different schemas")
    universe = a.universe if a.universe is not None else b.universe
    if mode == "union":
        seen = set(a.names)
        names = a.names + tuple(n for n in b.names if n not in seen)
    elif mode == "intersection":
        other = set(b.names)
        names = tuple(n for n in a.names if n in other)
    else:
        raise ValueError(f"mode must be 'union' or 'intersection', got {mode!r}")
    return FeatureSet(names, mode, universe)
