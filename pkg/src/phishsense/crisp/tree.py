"""C4.5-style binary decision tree over numeric thresholds."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.stats import norm

from ..dataset import Dataset, NEGATIVE, POSITIVE
from ..errors import ArityMismatch, EmptyDataset

SUBTREE_SLACK = 0.1  # C4.5 keeps a subtree only if it beats the leaf by this much
GAIN_EPS = 1e-12


@dataclass
class Node:
    counts: np.ndarray  # (neg, pos) training rows reaching the node
    feature: int = -1
    threshold: float = math.nan
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def make_leaf(self):
        self.feature, self.threshold, self.left, self.right = -1, math.nan, None, None


@njit(cache=True)
def _entropy2(neg, pos):
    n = neg + pos
    h = 0.0
    if neg > 0:
        p = neg / n
        h -= p * math.log2(p)
    if pos > 0:
        p = pos / n
        h -= p * math.log2(p)
    return h


@njit(cache=True)
def _best_cut(vs, ys, min_leaf):
    """Scan sorted values; returns (group index of the best cut or -1, gain)."""
    n = vs.size
    starts = np.empty(n + 1, np.int64)
    starts[0] = 0
    ng = 1
    for i in range(1, n):
        if vs[i] > vs[i - 1]:
            starts[ng] = i
            ng += 1
    starts[ng] = n
    gpos = np.zeros(ng, np.int64)
    for g in range(ng):
        for i in range(starts[g], starts[g + 1]):
            gpos[g] += ys[i]
    total_pos = gpos.sum()
    h = _entropy2(float(n - total_pos), float(total_pos))
    gains = np.full(max(ng - 1, 0), -np.inf)
    cum = 0
    best = -np.inf
    for g in range(ng - 1):
        cum += gpos[g]
        size_a = starts[g + 1] - starts[g]
        size_b = starts[g + 2] - starts[g + 1]
        if (gpos[g] == size_a and gpos[g + 1] == size_b) or (gpos[g] == 0 and gpos[g + 1] == 0):
            continue
        nl = starts[g + 1]
        if nl < min_leaf or n - nl < min_leaf:
            continue
        cond = (nl * _entropy2(float(nl - cum), float(cum))
                + (n - nl) * _entropy2(float(n - nl - total_pos + cum), float(total_pos - cum))) / n
        gains[g] = h - cond
        if gains[g] > best:
            best = gains[g]
    if best == -np.inf:
        return -1, 0.0, 0
    for g in range(ng - 1):
        if gains[g] >= best - GAIN_EPS:
            return g, gains[g], starts[g + 1]
    return -1, 0.0, 0


def best_threshold(v: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best binary cut of one feature by information gain.

    Candidates sit between adjacent distinct values unless both neighbouring
    value groups are pure and of the same class. Returns
    (gain, gain ratio, threshold) or None.
    """
    n = v.size
    if n < 2:
        return None
    order = np.argsort(v, kind="stable")
    vs = np.ascontiguousarray(v[order], dtype=np.float64)
    ys = np.ascontiguousarray(y[order], dtype=np.int64)
    g, gain, nl = _best_cut(vs, ys, min_leaf)
    if g < 0:
        return None
    frac = nl / n
    split_info = -(frac * math.log2(frac) + (1 - frac) * math.log2(1 - frac))
    thr = (vs[nl - 1] + vs[nl]) / 2.0
    if thr >= vs[nl]:
        thr = vs[nl - 1]
    return float(gain), float(gain / split_info), float(thr)


def choose_split(X, y, rows, features, min_leaf):
    """C4.5 choice: best gain ratio among tests with at least average gain."""
    found = []
    for f in features:
        r = best_threshold(X[rows, f], y[rows], min_leaf)
        if r is not None and r[0] > GAIN_EPS:
            found.append((f, *r))
    if not found:
        return None
    avg = sum(g for _, g, _, _ in found) / len(found)
    best = None
    for f, g, gr, thr in found:
        if g >= avg - 1e-9 and (best is None or gr > best[2] + GAIN_EPS):
            best = (f, g, gr, thr)
    return best[0], best[3]


def grow(X, y, min_leaf: int = 2, rng: np.random.Generator | None = None, k_features: int | None = None) -> Node:
    """Grow an unpruned tree; with ``rng`` a fresh random feature subset of
    size ``k_features`` is drawn at every node."""
    m = X.shape[1]
    all_features = np.arange(m)

    def build(rows):
        counts = np.bincount(y[rows], minlength=2).astype(np.int64)
        node = Node(counts)
        if counts.min() == 0 or rows.size < 2 * min_leaf:
            return node
        if rng is not None and k_features is not None and k_features < m:
            feats = np.sort(rng.choice(m, size=k_features, replace=False))
        else:
            feats = all_features
        split = choose_split(X, y, rows, feats, min_leaf)
        if split is None:
            return node
        f, thr = split
        go_left = X[rows, f] <= thr
        node.feature, node.threshold = int(f), thr
        node.left = build(rows[go_left])
        node.right = build(rows[~go_left])
        return node

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        return build(np.arange(X.shape[0]))
    finally:
        sys.setrecursionlimit(limit)


def added_errors(n: float, e: float, cf: float) -> float:
    """Extra errors predicted at confidence ``cf`` for e observed errors in n rows
    (upper binomial limit, C4.5's pessimistic estimate)."""
    if cf > 0.5:
        raise ValueError("confidence must be at most 0.5")
    if e < 1:
        base = n * (1 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = norm.ppf(1 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


def _leaf_estimate(node: Node, cf: float) -> float:
    n = float(node.counts.sum())
    e = n - float(node.counts.max())
    return e + added_errors(n, e, cf)


def prune(node: Node, cf: float) -> float:
    """Bottom-up subtree replacement; returns the node's estimated errors."""
    if node.is_leaf:
        return _leaf_estimate(node, cf)
    sub = prune(node.left, cf) + prune(node.right, cf)
    leaf = _leaf_estimate(node, cf)
    if leaf <= sub + SUBTREE_SLACK:
        node.make_leaf()
        return leaf
    return sub


class TreeModel:
    """Flat array form of a binary tree; ``counts`` holds per-node class counts."""

    kind = "tree"

    def __init__(self, feature, threshold, left, right, counts, n_features: int):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, 2)
        self.n_features = int(n_features)

    @classmethod
    def from_node(cls, root: Node, n_features: int) -> "TreeModel":
        feature, threshold, left, right, counts = [], [], [], [], []

        def visit(node):
            i = len(feature)
            feature.append(node.feature)
            threshold.append(node.threshold)
            left.append(-1)
            right.append(-1)
            counts.append(node.counts)
            if not node.is_leaf:
                left[i] = visit(node.left)
                right[i] = visit(node.right)
            return i

        visit(root)
        return cls(feature, threshold, left, right, np.array(counts), n_features)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def leaf_index(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, X):
        leaves = self.leaf_index(X)
        c = self.counts[leaves]
        labels = np.where(c[:, POSITIVE] > c[:, NEGATIVE], POSITIVE, NEGATIVE).astype(np.int8)
        scores = c[np.arange(len(c)), labels] / c.sum(axis=1)
        return labels, scores

    def to_lines(self) -> list[str]:
        lines = []

        def visit(i):
            if self.feature[i] < 0:
                neg, pos = self.counts[i]
                lines.append(f"L {POSITIVE if pos > neg else NEGATIVE} {neg},{pos}")
            else:
                lines.append(f"N {self.feature[i]} {float(self.threshold[i])!r}")
                visit(self.left[i])
                visit(self.right[i])

        visit(0)
        return lines

    @classmethod
    def from_lines(cls, lines, n_features: int) -> tuple["TreeModel", int]:
        """Parse a pre-order dump; returns the tree and the number of lines used."""
        feature, threshold, left, right, counts = [], [], [], [], []
        pos = 0

        def visit():
            nonlocal pos
            if pos >= len(lines):
                raise ValueError("truncated tree")
            parts = lines[pos].split()
            pos += 1
            i = len(feature)
            left.append(-1)
            right.append(-1)
            if parts[0] == "L":
                neg, posc = (int(v) for v in parts[2].split(","))
                feature.append(-1)
                threshold.append(math.nan)
                counts.append((neg, posc))
                return i, np.array([neg, posc])
            if parts[0] != "N":
                raise ValueError(f"bad tree line {lines[pos - 1]!r}")
            feature.append(int(parts[1]))
            threshold.append(float(parts[2]))
            counts.append(None)
            li, lc = visit()
            ri, rc = visit()
            left[i], right[i] = li, ri
            counts[i] = tuple(lc + rc)
            return i, lc + rc

        visit()
        return cls(feature, threshold, left, right, np.array(counts), n_features), pos


def c45_train(ds: Dataset, min_leaf: int = 2, confidence: float = 0.25, prune_tree: bool = True) -> TreeModel:
    if ds.n_rows == 0:
        raise EmptyDataset("cannot grow a tree on an empty dataset")
    root = grow(ds.X, ds.y.astype(np.int64), min_leaf=min_leaf)
    if prune_tree:
        prune(root, confidence)
    return TreeModel.from_node(root, ds.n_features)
