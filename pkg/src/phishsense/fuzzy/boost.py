"""AdaBoost.M1 with single fuzzy rules as weak learners."""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset, NEGATIVE, POSITIVE
from ..errors import EmptyDataset
from .partition import FuzzyPartition
from .rules import FuzzyEnsemble, FuzzyRule, FuzzyRuleBase, _majority

ALPHA_CAP = 10.0


def _stage_alpha(eps: float) -> float:
    if eps <= 0:
        return ALPHA_CAP
    return min(ALPHA_CAP, 0.5 * math.log((1 - eps) / eps))


def best_weak_rule(fires: list[np.ndarray], y: np.ndarray, w: np.ndarray):
    """Scan every (feature, label, consequent) stump; return the first with
    minimal weighted error as (feature index, label, consequent, error)."""
    neg_w = w * (y == NEGATIVE)
    pos_w = w * (y == POSITIVE)
    total = w.sum()
    best = None
    for j, F in enumerate(fires):
        # consequent=positive errs on firing negatives and silent positives
        err_pos = neg_w @ F + pos_w.sum() - pos_w @ F
        err_neg = total - err_pos
        for lab in range(F.shape[1]):
            for cls, err in ((NEGATIVE, err_neg[lab]), (POSITIVE, err_pos[lab])):
                if best is None or err < best[3] - 1e-15:
                    best = (j, lab, cls, float(err))
    return best


def adaboost_fuzzy_learn(
    ds: Dataset, partitions: dict[str, FuzzyPartition], T: int = 10
) -> FuzzyEnsemble:
    """A stage votes for its consequent where the rule fires (membership > 0)
    and for the other class elsewhere. Stops once a stage is perfect (its
    weight capped) or no stage beats chance (that stage is dropped, unless it
    is the first, which is kept with weight 0 so the ensemble is never empty).
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if ds.n_rows == 0:
        raise EmptyDataset("cannot boost on an empty dataset")
    parts = {f: partitions[f] for f in ds.names}
    fires = [(parts[f].memberships(ds.X[:, j]) > 0).astype(np.float64) for j, f in enumerate(ds.names)]
    y = ds.y.astype(np.int64)
    w = np.full(ds.n_rows, 1.0 / ds.n_rows)
    class_names = (ds.schema.negative_label, ds.schema.positive_label)
    members = []
    for _ in range(T):
        j, lab, cls, eps = best_weak_rule(fires, y, w)
        if eps < 1e-12:
            eps = 0.0
        if eps >= 0.5:
            if not members:
                alpha = 0.0
            else:
                break
        else:
            alpha = _stage_alpha(eps)
        rule = FuzzyRule(((ds.names[j], lab),), cls, 1.0)
        rb = FuzzyRuleBase(ds.names, [rule], parts, default_class=_majority(y), class_names=class_names, name="stage")
        members.append((rb, alpha))
        if eps == 0 or alpha == 0.0:
            break
        pred = np.where(fires[j][:, lab] > 0, cls, 1 - cls)
        miss = pred != y
        w = w * np.exp(np.where(miss, alpha, -alpha))
        w /= w.sum()
    return FuzzyEnsemble(ds.names, members, _majority(y), parts, class_names, name="fuzzy-adaboost")
