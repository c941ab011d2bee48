"""Random forest of unpruned gain-ratio trees."""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset, NEGATIVE, POSITIVE, derive_seed, rng_for
from ..errors import EmptyDataset
from .tree import TreeModel, grow


def auto_k_features(n_features: int) -> int:
    return int(math.floor(math.log2(n_features))) + 1 if n_features > 0 else 0


class ForestModel:
    kind = "forest"

    def __init__(self, trees, k_features: int, seed: int, tree_seeds=None):
        self.trees = list(trees)
        if not self.trees:
            raise ValueError("a forest needs at least one tree")
        self.k_features = int(k_features)
        self.seed = int(seed)
        self.tree_seeds = list(tree_seeds) if tree_seeds is not None else [0] * len(self.trees)
        self.n_features = self.trees[0].n_features

    def votes(self, X) -> np.ndarray:
        """Number of trees voting positive, per row."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return sum(t.predict(X)[0].astype(np.int64) for t in self.trees)

    def predict(self, X):
        pos = self.votes(X)
        n = len(self.trees)
        # ties go to the negative class
        labels = np.where(2 * pos > n, POSITIVE, NEGATIVE).astype(np.int8)
        scores = np.where(labels == POSITIVE, pos, n - pos) / n
        return labels, scores


def rf_train(
    ds: Dataset,
    n_trees: int = 100,
    k_features: int | str = "auto",
    seed: int = 42,
    bootstrap: bool = True,
    min_leaf: int = 1,
) -> ForestModel:
    if ds.n_rows == 0:
        raise EmptyDataset("cannot grow a forest on an empty dataset")
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    m = ds.n_features
    if k_features in ("auto", None):
        k = auto_k_features(m)
    elif k_features == "all":
        k = m
    else:
        k = int(k_features)
    k = max(1, min(k, m))
    X, y = ds.X, ds.y.astype(np.int64)
    trees, seeds = [], []
    for t in range(n_trees):
        tree_seed = derive_seed(seed, t)
        rng = rng_for(tree_seed)
        if bootstrap:
            rows = rng.integers(0, ds.n_rows, size=ds.n_rows)
            Xt, yt = X[rows], y[rows]
        else:
            Xt, yt = X, y
        root = grow(Xt, yt, min_leaf=min_leaf, rng=rng, k_features=k)
        trees.append(TreeModel.from_node(root, m))
        seeds.append(tree_seed)
    return ForestModel(trees, k, seed, seeds)
