"""Small deterministic datasets shared by the test modules."""

import numpy as np

from phishsense.dataset import Dataset, FeatureSchema


def make_ds(X, y, names=None) -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"f{i}" for i in range(X.shape[1])]
    kinds = []
    for j in range(X.shape[1]):
        col = X[:, j]
        kinds.append("binary" if np.isin(col, (0.0, 1.0)).all() else "numeric")
    return Dataset(FeatureSchema(tuple(zip(names, kinds))), X, np.asarray(y, dtype=np.int8))


def checkerboard() -> Dataset:
    # 2x2 grid with uneven cell counts so every split has non-zero gain
    cells = [((0, 0), 0, 3), ((0, 1), 1, 1), ((1, 0), 1, 2), ((1, 1), 0, 2)]
    X, y = [], []
    for xy, label, count in cells:
        X += [xy] * count
        y += [label] * count
    return make_ds(X, y)


def separable(n=1000, n_noise=2, seed=0, gap=0.2) -> Dataset:
    """x0 below 0.5-gap/2 is negative, above 0.5+gap/2 positive; other columns noise."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], [n // 2, n - n // 2])
    lo = (1 - gap) / 2
    x0 = np.where(y == 1, rng.uniform(lo + gap, 1.0, n), rng.uniform(0.0, lo, n))
    X = np.column_stack([x0] + [rng.uniform(0, 1, n) for _ in range(n_noise)])
    return make_ds(X, y)


def blobs(n=200, m=4, seed=0, shift=3.0) -> Dataset:
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], [n // 2, n - n // 2])
    X = rng.normal(size=(n, m)) + shift * y[:, None] * (np.arange(m) % 2 == 0)
    return make_ds(X, y)


def random_binary(n=120, m=10, seed=0, informative=3) -> Dataset:
    """Binary features with a few informative columns, shaped like the corpus."""
    rng = np.random.default_rng(seed)
    y = rng.permutation(np.repeat([0, 1], [n // 2, n - n // 2]))
    X = rng.integers(0, 2, size=(n, m)).astype(float)
    for j in range(min(informative, m)):
        flip = rng.random(n) < 0.1 + 0.1 * j
        X[:, j] = np.where(flip, 1 - y, y)
    return make_ds(X, y)


def random_continuous(n=60, m=3, seed=0) -> Dataset:
    rng = np.random.default_rng(seed)
    y = rng.permutation(np.repeat([0, 1], [n // 2, n - n // 2]))
    X = rng.normal(size=(n, m)) + 0.8 * y[:, None]
    return make_ds(X, y)


def conflict_free(ds: Dataset) -> bool:
    seen = {}
    for row, label in zip(map(tuple, ds.X), ds.y.tolist()):
        if seen.setdefault(row, label) != label:
            return False
    return True


def tree_fixtures() -> dict[str, Dataset]:
    out = {
        "checkerboard": checkerboard(),
        "separable": separable(200, 2, seed=1),
        "blobs": blobs(150, 3, seed=2),
        "binary": random_binary(80, 6, seed=3),
        "one_feature": make_ds([[1], [2], [3], [4], [5], [6]], [0, 0, 1, 1, 0, 1]),
    }
    for s in range(5):
        out[f"continuous{s}"] = random_continuous(40, 3, seed=10 + s)
    return out
