import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fixtures import make_ds, random_binary, random_continuous
from phishsense.discretize import CutPoints, equal_frequency_cut_points, mdl_cut_points, mdl_discretize
from phishsense.errors import EmptyInput, KOutOfRange, SchemaMismatch, TooFewRowsPerClass, UnknownFeature
from phishsense.selection import (
    FeatureRanking,
    FeatureSet,
    combine,
    entropy,
    information_gain,
    rank_infogain,
    rank_relieff,
    relieff_weights,
    top_k,
)


def toy_tables():
    """Every label vector over a few value layouts, 2 to 8 rows."""
    rng = np.random.default_rng(7)
    for n in range(2, 9):
        layouts = [
            np.arange(n, dtype=float),
            np.arange(n, dtype=float) // 2,
            rng.integers(0, 3, n).astype(float),
            np.round(rng.normal(size=n), 2),
        ]
        for values in layouts:
            for labels in itertools.product((0, 1), repeat=n):
                yield values, np.array(labels)


TOY_TABLES = list(toy_tables())


# ------------------------------------------------------------------ entropy


def test_entropy_examples():
    assert entropy([1, 1, 0, 0]) == 1.0
    assert entropy([1, 1, 1]) == 0.0
    assert entropy([1, 1, 1, 0]) == pytest.approx(0.811278, abs=1e-6)
    assert entropy([1, 1, 1, 0]) == -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    with pytest.raises(EmptyInput):
        entropy([])


# ------------------------------------------------------------------ MDL


def test_mdl_examples():
    assert mdl_cut_points([3, 3, 3, 3], [0, 1, 0, 1]) == ()
    cuts = mdl_cut_points([1, 2, 9, 10], [0, 0, 1, 1])
    assert len(cuts) == 1 and 2 < cuts[0] < 9


def test_mdl_matches_oracle_on_toy_tables():
    assert len(TOY_TABLES) > 1500
    for values, labels in TOY_TABLES:
        assert list(mdl_cut_points(values, labels)) == oracles.mdl_cuts(values.tolist(), labels.tolist())


def test_mdl_matches_oracle_on_interleaved_20():
    values = np.arange(20, dtype=float)
    labels = np.array([0, 0, 0, 1, 0, 0, 1, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0])
    expected = oracles.mdl_cuts(values.tolist(), labels.tolist())
    assert list(mdl_cut_points(values, labels)) == expected
    rng = np.random.default_rng(3)
    for _ in range(200):
        v = rng.integers(0, 12, 20).astype(float)
        y = rng.integers(0, 2, 20)
        assert list(mdl_cut_points(v, y)) == oracles.mdl_cuts(v.tolist(), y.tolist())


def test_mdl_finds_multiple_cuts():
    values = np.arange(60, dtype=float)
    labels = np.array([0] * 20 + [1] * 20 + [0] * 20)
    assert mdl_cut_points(values, labels) == (19.5, 39.5)


def test_mdl_discretize_dataset():
    ds = make_ds([[1, 5], [2, 5], [9, 5], [10, 5]], [0, 0, 1, 1])
    cp = mdl_discretize(ds, "f0")
    assert isinstance(cp, CutPoints) and cp.thresholds == (5.5,)
    assert cp.bins([1, 5.5, 6]).tolist() == [0, 0, 1]
    assert mdl_discretize(ds, "f1").thresholds == ()
    with pytest.raises(UnknownFeature):
        mdl_discretize(ds, "nope")


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 1)), min_size=2, max_size=40))
def test_mdl_cuts_are_valid(pairs):
    v = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs])
    cuts = mdl_cut_points(v, y)
    assert list(cuts) == sorted(set(cuts))
    distinct = np.unique(v)
    for c in cuts:
        # strictly between two adjacent observed values, so equal values stay together
        assert not np.any(distinct == c)
        i = np.searchsorted(distinct, c)
        assert 0 < i < distinct.size


def test_equal_frequency():
    cuts = equal_frequency_cut_points(np.arange(100), 10)
    assert len(cuts) == 9
    assert equal_frequency_cut_points([1, 1, 1], 10) == ()


# ------------------------------------------------------------------ InfoGain


def test_infogain_matches_oracle_on_toy_tables():
    for values, labels in TOY_TABLES:
        ig = information_gain(values, labels)
        expected = oracles.info_gain(values.tolist(), labels.tolist())
        assert ig == expected, (values, labels)


def test_infogain_examples():
    y = np.array([0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1])
    assert information_gain(y.astype(float), y) == pytest.approx(entropy(y), abs=1e-15)
    assert information_gain(np.ones(12), y) == 0.0


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-20, 20), st.integers(0, 1)), min_size=2, max_size=60),
    st.sampled_from(["cube", "exp", "affine"]),
)
def test_infogain_bounds_and_monotone_invariance(pairs, transform):
    v = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs])
    ig = information_gain(v, y)
    assert 0.0 <= ig <= entropy(y)
    f = {"cube": lambda a: a**3, "exp": lambda a: np.exp(a / 7), "affine": lambda a: 3 * a - 2}[transform]
    assert information_gain(f(v), y) == pytest.approx(ig, abs=1e-12)


def test_rank_infogain_orders_and_breaks_ties_by_index():
    ds = random_binary(100, 6, seed=4, informative=2)
    r = rank_infogain(ds)
    assert sorted(r.names) == sorted(ds.names)
    scores = [s for _, s in r.scores]
    assert scores == sorted(scores, reverse=True)
    tie = FeatureRanking.from_scores("infogain", ["a", "b", "c"], [0.5, 0.7, 0.5])
    assert tie.names == ("b", "a", "c")


# ------------------------------------------------------------------ ReliefF


def twelve_row_fixtures():
    rng = np.random.default_rng(11)
    out = []
    for s in range(20):
        y = np.array([0] * 6 + [1] * 6)
        X = np.column_stack([
            y + rng.normal(0, 0.1, 12),
            rng.integers(0, 3, 12),
            rng.normal(size=12),
            np.full(12, 4.0),
        ])
        out.append((X, y))
    # coarse integer grids produce plenty of tied distances
    for s in range(10):
        X = rng.integers(0, 3, size=(12, 3)).astype(float)
        y = rng.permutation(np.array([0] * 5 + [1] * 7))
        out.append((X, y))
    return out


@pytest.mark.parametrize("k", [1, 3, 4])
def test_relieff_matches_brute_force(k):
    for X, y in twelve_row_fixtures():
        got = relieff_weights(X, y, k)
        want = oracles.relieff(X.tolist(), y.tolist(), k)
        assert np.max(np.abs(got - np.array(want))) <= 1e-9


def test_relieff_examples():
    X, y = twelve_row_fixtures()[0]
    ds = make_ds(X, y)
    r = rank_relieff(ds, k_neighbors=3)
    assert r.names[0] == "f0" and r.score("f0") > 0
    assert r.score("f3") == 0.0
    assert rank_relieff(ds, 3) == r
    with pytest.raises(TooFewRowsPerClass):
        rank_relieff(ds, k_neighbors=6)


def test_relieff_sampling_is_seeded():
    ds = random_continuous(80, 4, seed=1)
    a = rank_relieff(ds, 5, sample_count=20, seed=1)
    assert a == rank_relieff(ds, 5, sample_count=20, seed=1)
    assert a != rank_relieff(ds, 5, sample_count=20, seed=2)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 5))
def test_relieff_duplicate_columns_and_range(seed, k):
    ds = random_continuous(30, 3, seed=seed)
    X = np.column_stack([ds.X, ds.X[:, 1]])
    w = relieff_weights(X, ds.y, k)
    assert abs(w[1] - w[3]) <= 1e-12
    assert np.all(w >= -1) and np.all(w <= 1)


# ------------------------------------------------------------------ sets


def test_top_k():
    r = FeatureRanking.from_scores("infogain", ["a", "b", "c", "d"], [0.1, 0.4, 0.3, 0.2])
    assert top_k(r, 1).names == ("b",)
    assert top_k(r, 4).names == ("b", "c", "d", "a")
    assert top_k(r, 2).provenance == "ig-top2"
    for bad in (0, 5):
        with pytest.raises(KOutOfRange):
            top_k(r, bad)


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=20), st.data())
def test_top_k_prefix(scores, data):
    names = [f"f{i}" for i in range(len(scores))]
    r = FeatureRanking.from_scores("relieff", names, scores)
    assert sorted(r.names) == sorted(names)
    k1 = data.draw(st.integers(1, len(names)))
    k2 = data.draw(st.integers(k1, len(names)))
    assert top_k(r, k2).names[:k1] == top_k(r, k1).names


def test_combine_examples():
    uni = tuple(f"f{i}" for i in range(40))
    a = FeatureSet(uni[:15], "a", uni)
    assert combine(a, a, "union").names == a.names == combine(a, a, "intersection").names
    b = FeatureSet(uni[15:30], "b", uni)
    assert len(combine(a, b, "union")) == 30 and len(combine(a, b, "intersection")) == 0
    c = FeatureSet(("f3", "f20", "f1"), "c", uni)
    assert combine(a, c, "union").names == uni[:15] + ("f20",)
    assert combine(c, a, "intersection").names == ("f3", "f1")
    with pytest.raises(SchemaMismatch):
        combine(a, FeatureSet(("x",), "x", ("x",)), "union")


@settings(max_examples=100)
@given(st.sets(st.integers(0, 30)), st.sets(st.integers(0, 30)), st.randoms())
def test_combine_sizes(sa, sb, rnd):
    a_names = [f"f{i}" for i in sa]
    b_names = [f"f{i}" for i in sb]
    rnd.shuffle(a_names)
    rnd.shuffle(b_names)
    a, b = FeatureSet(tuple(a_names)), FeatureSet(tuple(b_names))
    u, i = combine(a, b, "union"), combine(a, b, "intersection")
    assert len(u) + len(i) == len(a) + len(b)
    assert set(u.names) == sa_names(sa, sb, set.union) and set(i.names) == sa_names(sa, sb, set.intersection)


def sa_names(sa, sb, op):
    return {f"f{i}" for i in op(set(sa), set(sb))}


def test_feature_set_validation_and_text(tmp_path):
    with pytest.raises(ValueError):
        FeatureSet(("a", "a"))
    with pytest.raises(UnknownFeature):
        FeatureSet(("z",), universe=("a",))
    r = FeatureRanking.from_scores("infogain", ["a", "b"], [0.25, 0.5])
    assert FeatureRanking.from_text(r.to_text(), "infogain") == r
    p = tmp_path / "rank.txt"
    p.write_text(r.to_text())
    assert FeatureSet.read(p).names == ("b", "a")
