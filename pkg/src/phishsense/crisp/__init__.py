"""Crisp learners: C4.5-style tree, random forest and multilayer perceptron.

All trained models expose ``predict(X) -> (labels, scores)``.
"""

import numpy as np

from .forest import ForestModel, rf_train
from .mlp import MlpModel, mlp_train
from .serialize import dumps, loads
from .tree import TreeModel, c45_train

CrispModel = TreeModel | ForestModel | MlpModel


def crisp_predict(model: CrispModel, x) -> tuple[int, float]:
    labels, scores = model.predict(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    return int(labels[0]), float(scores[0])


__all__ = [
    "CrispModel",
    "ForestModel",
    "MlpModel",
    "TreeModel",
    "c45_train",
    "crisp_predict",
    "dumps",
    "loads",
    "mlp_train",
    "rf_train",
]
