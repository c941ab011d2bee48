import numpy as np
import pytest

from fixtures import make_ds, random_continuous
from phishsense.errors import ModelFormatError
from phishsense.learners import DEFAULTS, LearnerConfig, load_model, model_from_text

FAST = {"rf": ["n_trees=5"], "mlp": ["epochs=20"]}


def test_parse_and_coerce():
    c = LearnerConfig.parse("rf", ["n_trees=7", "bootstrap=false", "k_features=3"])
    p = dict(c.params)
    assert p["n_trees"] == 7 and p["bootstrap"] is False and p["k_features"] == 3
    assert dict(LearnerConfig.parse("rf", ["k_features=auto"]).params)["k_features"] == "auto"
    assert dict(LearnerConfig.parse("j48", ["confidence=0.1"]).params)["confidence"] == 0.1
    assert LearnerConfig.parse("j48") == LearnerConfig("j48")
    assert LearnerConfig("j48", label="tree").id == "tree"


@pytest.mark.parametrize("learner,args", [
    ("svm", []),
    ("rf", ["depth=3"]),
    ("rf", ["n_trees"]),
    ("rf", ["n_trees=many"]),
    ("j48", ["prune=maybe"]),
])
def test_parse_errors(learner, args):
    with pytest.raises(ValueError):
        LearnerConfig.parse(learner, args)


@pytest.mark.parametrize("name", list(DEFAULTS))
def test_model_text_round_trip(name, tmp_path):
    ds = random_continuous(50, 3, seed=2)
    X = ds.X.copy()
    X[0, 0] = np.nan
    ds = make_ds(X, ds.y)
    model = LearnerConfig.parse(name, FAST.get(name, [])).fit(ds, seed=5)
    path = tmp_path / "m.model"
    model.save(path)
    back = load_model(path)
    assert back.to_text() == model.to_text()
    assert back.features == model.features and back.learner == name
    assert back.params == model.params
    a, b = model.predict(ds.X), back.predict(ds.X)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_missing_values_use_training_medians():
    X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
    model = LearnerConfig("j48", (("min_leaf", 1),)).fit(make_ds(X, [0, 0, 0, 1, 1, 1]))
    assert model.medians.tolist() == [6.0]
    assert model.predict([[np.nan]])[0].tolist() == model.predict([[6.0]])[0].tolist()


@pytest.mark.parametrize("text", [
    "",
    "hello\n---\n",
    "phishsense-model: 1\nlearner: j48\n---\n",
    "phishsense-model: 1\nlearner: j48\nclasses: a,b\nfeature: x\nmedians: 1 2\n---\nL 0 1,1\n",
    "phishsense-model: 1\nlearner: chi\nclasses: a,b\nfeature: x\nmedians: 1\n---\nnonsense\n",
])
def test_bad_model_text(text):
    with pytest.raises(ModelFormatError):
        model_from_text(text)
