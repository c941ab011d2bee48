"""Named learner configurations and the trained-model wrapper shared by
evaluation and the CLI."""

from __future__ import annotations

import ast
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import crisp, fuzzy
from .dataset import Dataset, column_medians, fill_missing, impute
from .errors import ModelFormatError, SchemaMismatch

DEFAULTS: dict[str, dict[str, Any]] = {
    "j48": {"min_leaf": 2, "confidence": 0.25, "prune": True},
    "rf": {"n_trees": 100, "k_features": "auto", "bootstrap": True, "min_leaf": 1},
    "mlp": {"hidden": "auto", "lr": 0.3, "momentum": 0.2, "epochs": 500},
    "chi": {"n_labels": 5, "weight_kind": "penalized_cf", "inference": "single_winner"},
    "furia-lite": {"grow_ratio": 2 / 3, "min_covered": 1},
    "fuzzy-adaboost": {"n_labels": 5, "T": 10},
}
CRISP = ("j48", "rf", "mlp")
FUZZY = ("chi", "furia-lite", "fuzzy-adaboost")


def _coerce(value: str, default):
    if isinstance(default, bool):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    # string-valued defaults such as "auto" also accept integers
    try:
        return int(value)
    except ValueError:
        return value


@dataclass(frozen=True)
class LearnerConfig:
    learner: str
    params: tuple[tuple[str, Any], ...] = ()
    label: str | None = None

    def __post_init__(self):
        if self.learner not in DEFAULTS:
            raise ValueError(f"unknown learner {self.learner!r}; choose from {', '.join(DEFAULTS)}")
        merged = dict(DEFAULTS[self.learner])
        for k, v in dict(self.params).items():
            if k not in merged:
                raise ValueError(f"learner {self.learner!r} has no parameter {k!r}")
            merged[k] = _coerce(v, DEFAULTS[self.learner][k]) if isinstance(v, str) else v
        object.__setattr__(self, "params", tuple(sorted(merged.items())))

    @property
    def id(self) -> str:
        return self.label or self.learner

    @classmethod
    def parse(cls, learner: str, assignments=()) -> "LearnerConfig":
        params = []
        for a in assignments:
            key, sep, value = a.partition("=")
            if not sep:
                raise ValueError(f"parameter must look like key=value, got {a!r}")
            params.append((key.strip(), value.strip()))
        return cls(learner, tuple(params))

    def fit(self, ds: Dataset, seed: int = 42) -> "TrainedModel":
        medians = column_medians(ds.X)
        clean, _ = impute(ds, medians)
        p = dict(self.params)
        name = self.learner
        if name == "j48":
            model = crisp.c45_train(clean, p["min_leaf"], p["confidence"], p["prune"])
        elif name == "rf":
            model = crisp.rf_train(clean, p["n_trees"], p["k_features"], seed, p["bootstrap"], p["min_leaf"])
        elif name == "mlp":
            model = crisp.mlp_train(clean, p["hidden"], p["lr"], p["momentum"], p["epochs"], seed)
        elif name == "chi":
            parts = fuzzy.build_uniform_partitions(clean, p["n_labels"])
            model = fuzzy.chi_learn(clean, parts, p["weight_kind"], p["inference"])
        elif name == "furia-lite":
            model = fuzzy.furia_learn(clean, p["grow_ratio"], p["min_covered"], seed)
        else:
            parts = fuzzy.build_uniform_partitions(clean, p["n_labels"])
            model = fuzzy.adaboost_fuzzy_learn(clean, parts, p["T"])
        return TrainedModel(self.learner, self.params, ds.schema.names, medians, model,
                            (ds.schema.negative_label, ds.schema.positive_label), ds.schema.class_attribute)


@dataclass
class TrainedModel:
    """A fitted learner plus the training-fold statistics needed at predict time."""

    learner: str
    params: tuple
    features: tuple[str, ...]
    medians: np.ndarray
    model: Any
    class_names: tuple[str, str] = ("legitimate", "phishing")
    class_attribute: str = "CLASS_LABEL"

    def predict(self, X):
        return self.model.predict(fill_missing(np.atleast_2d(np.asarray(X, dtype=np.float64)), self.medians))

    def check_schema(self, names):
        if tuple(names) != tuple(self.features):
            raise SchemaMismatch("test features differ from the training features")

    @property
    def is_fuzzy(self) -> bool:
        return self.learner in FUZZY

    def to_text(self) -> str:
        inner = fuzzy.dumps(self.model) if self.is_fuzzy else crisp.dumps(self.model)
        lines = [
            "phishsense-model: 1",
            f"learner: {self.learner}",
            "params: " + " ".join(f"{k}={v!r}" for k, v in self.params),
            "classes: " + ",".join(self.class_names),
            f"class_attribute: {self.class_attribute}",
        ]
        lines += [f"feature: {f}" for f in self.features]
        lines.append("medians: " + " ".join(repr(float(m)) for m in self.medians))
        lines.append("---")
        return "\n".join(lines) + "\n" + inner

    def save(self, path):
        Path(path).write_text(self.to_text(), encoding="utf-8")


def model_from_text(text: str) -> TrainedModel:
    head, sep, body = text.partition("\n---\n")
    if not sep or not head.startswith("phishsense-model: 1"):
        raise ModelFormatError("not a phishsense model file")
    header: dict[str, str] = {}
    features = []
    for ln in head.splitlines():
        key, _, value = ln.partition(": ")
        if key == "feature":
            features.append(value)
        else:
            header[key] = value
    try:
        learner = header["learner"]
        params = []
        for item in header.get("params", "").split():
            k, _, v = item.partition("=")
            params.append((k, ast.literal_eval(v)))
        medians = np.array([float(v) for v in header["medians"].split()]) if header.get("medians") else np.zeros(0)
        classes = tuple(header["classes"].split(","))
    except (KeyError, ValueError, SyntaxError) as exc:
        raise ModelFormatError(f"bad model header: {exc}") from None
    if medians.size != len(features):
        raise ModelFormatError("median count differs from feature count")
    model = fuzzy.loads(body) if learner in FUZZY else crisp.loads(body)
    return TrainedModel(learner, tuple(params), tuple(features), medians, model, classes,
                        header.get("class_attribute", "CLASS_LABEL"))


def load_model(path) -> TrainedModel:
    return model_from_text(Path(path).read_text(encoding="utf-8"))
