import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import blobs, checkerboard, conflict_free, make_ds, random_binary, separable, tree_fixtures
from phishsense.crisp import (
    ForestModel,
    MlpModel,
    TreeModel,
    c45_train,
    crisp_predict,
    dumps,
    loads,
    mlp_train,
    rf_train,
)
from phishsense.crisp.forest import auto_k_features
from phishsense.crisp.mlp import auto_hidden, init_model
from phishsense.crisp.tree import added_errors, best_threshold
from phishsense.errors import ArityMismatch, EmptyDataset, ModelFormatError

# ------------------------------------------------------------------ tree


def leaf(counts):
    return TreeModel([-1], [0.0], [-1], [-1], [counts], 1)


def test_pure_and_constant_inputs_give_single_leaf():
    pure = make_ds([[1], [2], [3]], [1, 1, 1])
    t = c45_train(pure)
    assert t.n_nodes == 1 and crisp_predict(t, [5]) == (1, 1.0)
    const = make_ds([[4, 4]] * 5, [0, 1, 1, 0, 1])
    t = c45_train(const, prune_tree=False, min_leaf=1)
    assert t.n_nodes == 1 and crisp_predict(t, [4, 4]) == (1, 0.6)


def test_checkerboard_unpruned():
    ds = checkerboard()
    assert ds.n_rows == 8
    t = c45_train(ds, min_leaf=1, prune_tree=False)
    assert t.predict(ds.X)[0].tolist() == ds.y.tolist()


def test_unpruned_tree_fits_every_conflict_free_fixture():
    for name, ds in tree_fixtures().items():
        if not conflict_free(ds):
            continue
        t = c45_train(ds, min_leaf=1, prune_tree=False)
        assert (t.predict(ds.X)[0] == ds.y).all(), name


def node_rows(t, X):
    """Training rows reaching every node."""
    out = {0: np.arange(X.shape[0])}
    stack = [0]
    while stack:
        i = stack.pop()
        if t.feature[i] < 0:
            continue
        rows = out[i]
        left = X[rows, t.feature[i]] <= t.threshold[i]
        out[t.left[i]], out[t.right[i]] = rows[left], rows[~left]
        stack += [t.left[i], t.right[i]]
    return out


def test_tree_structure_invariants():
    for ds in tree_fixtures().values():
        t = c45_train(ds, min_leaf=2, prune_tree=False)
        leaves = t.feature < 0
        assert t.counts[leaves].sum() == ds.n_rows
        reach = node_rows(t, ds.X)
        for i in range(t.n_nodes):
            assert t.counts[i].tolist() == np.bincount(ds.y[reach[i]], minlength=2).tolist()
            if leaves[i]:
                continue
            assert t.left[i] >= 0 and t.right[i] >= 0
            assert (t.counts[t.left[i]] + t.counts[t.right[i]] == t.counts[i]).all()
            col = np.unique(ds.X[reach[i], t.feature[i]])
            mids = (col[1:] + col[:-1]) / 2
            assert t.threshold[i] in mids


def test_leaf_prediction_example():
    assert crisp_predict(leaf([1, 9]), [0]) == (1, 0.9)
    assert crisp_predict(leaf([5, 5]), [0]) == (0, 0.5)


def test_pessimistic_error_matches_published_table():
    # upper 25% binomial limits for zero errors from the C4.5 book
    assert added_errors(6, 0, 0.25) / 6 == pytest.approx(0.206, abs=5e-4)
    assert added_errors(9, 0, 0.25) / 9 == pytest.approx(0.143, abs=5e-4)
    assert added_errors(1, 0, 0.25) == pytest.approx(0.75, abs=1e-12)
    # normal-approximation branch: monotone in e and bounded by n - e
    vals = [e + added_errors(20, e, 0.25) for e in range(1, 20)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v <= 20 + 1e-12 for v in vals)


def test_pruning_shrinks_noise_tree():
    ds = random_binary(200, 8, seed=1, informative=1)
    full = c45_train(ds, prune_tree=False)
    pruned = c45_train(ds, prune_tree=True)
    assert pruned.n_nodes < full.n_nodes


def test_tree_empty_and_arity():
    with pytest.raises(EmptyDataset):
        c45_train(make_ds(np.zeros((0, 2)), []))
    t = c45_train(blobs(40, 2))
    with pytest.raises(ArityMismatch):
        t.predict(np.zeros((1, 3)))


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-30, 30), st.integers(0, 1)), min_size=4, max_size=50),
    st.sampled_from(["cube", "exp", "affine"]),
)
def test_gain_ratio_monotone_invariance(pairs, transform):
    v = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs])
    f = {"cube": lambda a: a**3, "exp": lambda a: np.exp(a / 9), "affine": lambda a: 2.5 * a + 1}[transform]
    a = best_threshold(v, y, 1)
    b = best_threshold(f(v), y, 1)
    assert (a is None) == (b is None)
    if a is not None:
        assert a[0] == pytest.approx(b[0], abs=1e-12)
        assert a[1] == pytest.approx(b[1], abs=1e-12)


# ------------------------------------------------------------------ forest


def test_single_tree_forest_equals_unpruned_tree():
    for name, ds in tree_fixtures().items():
        tree = c45_train(ds, min_leaf=1, prune_tree=False)
        forest = rf_train(ds, n_trees=1, k_features="all", bootstrap=False, min_leaf=1, seed=5)
        probe = np.vstack([ds.X, np.random.default_rng(0).normal(size=(50, ds.n_features)) * 3])
        assert tree.predict(probe)[0].tolist() == forest.predict(probe)[0].tolist(), name


def test_forest_votes_and_ties():
    pos, neg = leaf([0, 4]), leaf([4, 0])
    f3 = ForestModel([pos, pos, neg], 1, 0)
    assert crisp_predict(f3, [0]) == (1, pytest.approx(2 / 3))
    f4 = ForestModel([pos, pos, neg, neg], 1, 0)
    assert crisp_predict(f4, [0]) == (0, 0.5)


def test_forest_determinism_and_auto_k():
    ds = random_binary(100, 9, seed=6)
    a = rf_train(ds, n_trees=7, seed=3)
    b = rf_train(ds, n_trees=7, seed=3)
    assert dumps(a) == dumps(b)
    assert dumps(a) != dumps(rf_train(ds, n_trees=7, seed=4))
    assert a.k_features == auto_k_features(9) == 4
    assert auto_k_features(48) == 6


def test_forest_accuracy_grows_with_trees():
    ds = random_binary(120, 12, seed=11, informative=4)
    sizes = (1, 5, 25)
    failures = 0
    for batch in range(10):
        means = []
        for n in sizes:
            accs = [
                (rf_train(ds, n_trees=n, seed=1000 * batch + s).predict(ds.X)[0] == ds.y).mean()
                for s in range(10)
            ]
            means.append(np.mean(accs))
        if any(b < a for a, b in zip(means, means[1:])):
            failures += 1
    assert failures <= 2


# ------------------------------------------------------------------ mlp


def numeric_gradient(model, Xn, y, eps=1e-5):
    grads = []
    for p in model.params():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = model.loss(Xn, y)
            flat[i] = old - eps
            down = model.loss(Xn, y)
            flat[i] = old
            gflat[i] = (up - down) / (2 * eps)
        grads.append(g)
    return grads


def test_mlp_gradient_matches_finite_differences():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n_in, n_hid = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        Xn = rng.uniform(0, 1, size=(3, n_in))
        y = rng.integers(0, 2, 3)
        model = init_model(n_in, n_hid, np.zeros(n_in), np.ones(n_in), seed)
        # push weights away from the tiny init so gradients are not all near zero
        for p in model.params():
            p *= 4
        analytic = np.concatenate([g.ravel() for g in model.gradient(Xn, y)])
        numeric = np.concatenate([g.ravel() for g in numeric_gradient(model, Xn, y)])
        rel = np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-7)
        worst = max(worst, float(rel.max()))
    assert worst <= 1e-4


def test_mlp_epoch_zero_is_seeded_init():
    ds = blobs(60, 3, seed=1)
    a, b = mlp_train(ds, epochs=0, seed=9), mlp_train(ds, epochs=0, seed=9)
    assert dumps(a) == dumps(b)
    ref = init_model(3, auto_hidden(3), ds.X.min(axis=0), ds.X.max(axis=0), 9)
    assert np.array_equal(a.W1, ref.W1) and np.array_equal(a.b2, ref.b2)
    assert np.all(np.abs(a.W1) <= 0.5)
    assert a.layer_sizes == (3, 3, 2)


def test_mlp_learns_separable_data():
    ds = separable(200, 1, seed=3, gap=0.2)
    m = mlp_train(ds, epochs=500, seed=1)
    assert (m.predict(ds.X)[0] == ds.y).mean() >= 0.99


def test_mlp_loss_finite_and_decreasing_with_small_lr():
    ds = blobs(40, 2, seed=5)
    m = mlp_train(ds, lr=0.01, momentum=0.2, epochs=10, seed=2, track_loss=True)
    hist = m.loss_history
    assert len(hist) == 10 and all(math.isfinite(v) for v in hist)
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    m = mlp_train(ds, epochs=30, seed=2, track_loss=True)
    assert all(math.isfinite(v) for v in m.loss_history)


def test_mlp_predict_example():
    logit = lambda p: math.log(p / (1 - p))  # noqa: E731
    m = MlpModel(np.zeros((1, 1)), np.zeros(1), np.zeros((2, 1)), np.array([logit(0.7), logit(0.3)]), [0], [1])
    label, score = crisp_predict(m, [0.5])
    assert label == 0 and score == pytest.approx(0.7)
    tie = MlpModel(np.zeros((1, 1)), np.zeros(1), np.zeros((2, 1)), np.zeros(2), [0], [1])
    assert crisp_predict(tie, [0.5])[0] == 0


def test_mlp_validation():
    with pytest.raises(EmptyDataset):
        mlp_train(make_ds(np.zeros((0, 2)), []))
    with pytest.raises(ValueError):
        mlp_train(blobs(10, 2), lr=0)
    with pytest.raises(ValueError):
        MlpModel(np.zeros((2, 3)), np.zeros(2), np.zeros((2, 2)), np.zeros(2), np.zeros(2), np.zeros(2))


# ------------------------------------------------------------------ determinism and serialisation


@pytest.mark.parametrize("kind", ["tree", "forest", "mlp"])
def test_round_trip(kind):
    ds = separable(150, 3, seed=2)
    model = {
        "tree": lambda: c45_train(ds),
        "forest": lambda: rf_train(ds, n_trees=5, seed=1),
        "mlp": lambda: mlp_train(ds, epochs=20, seed=1),
    }[kind]()
    text = dumps(model)
    assert text.startswith("model-format: 1\n")
    back = loads(text)
    assert dumps(back) == text
    probe = np.random.default_rng(1).uniform(-0.5, 1.5, size=(200, 4))
    a, sa = model.predict(probe)
    b, sb = back.predict(probe)
    assert a.tolist() == b.tolist() and sa.tolist() == sb.tolist()


def test_tree_text_lines():
    ds = make_ds([[1], [2], [9], [10]], [0, 0, 1, 1])
    text = dumps(c45_train(ds, min_leaf=1))
    body = [ln for ln in text.splitlines() if ln[:2] in ("N ", "L ")]
    assert body == ["N 0 5.5", "L 0 2,0", "L 1 0,2"]


def test_bad_model_text():
    for bad in ["", "model-format: 1\nkind: tree\nn_features: 1\nN 0 1.0\n", "model-format: 9\nkind: tree\n"]:
        with pytest.raises(ModelFormatError):
            loads(bad)


@pytest.mark.parametrize("learner", ["tree", "forest", "mlp"])
def test_learners_deterministic(learner):
    ds = blobs(80, 3, seed=7)
    fit = {
        "tree": lambda: c45_train(ds),
        "forest": lambda: rf_train(ds, n_trees=4, seed=11),
        "mlp": lambda: mlp_train(ds, epochs=15, seed=11),
    }[learner]
    assert dumps(fit()) == dumps(fit())
