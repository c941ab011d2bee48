"""Chi et al. grid rule learning with certainty-factor rule weights."""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset, NEGATIVE, POSITIVE
from ..errors import EmptyDataset
from .partition import FuzzyPartition
from .rules import FuzzyRule, FuzzyRuleBase, _majority

WEIGHT_KINDS = ("certainty_factor", "penalized_cf")


def _rule_activation(memberships, labels, n_rows):
    """Firing degree of one grid antecedent on every training row.

    Rows drop out as soon as one feature has zero membership, which keeps
    this cheap for wide rule bases.
    """
    rows = np.arange(n_rows)
    act = np.ones(n_rows)
    for m, lab in zip(memberships, labels):
        vals = m[rows, lab]
        keep = vals > 0
        rows = rows[keep]
        act = act[keep] * vals[keep]
        if rows.size == 0:
            break
    return rows, act


def chi_learn(
    ds: Dataset,
    partitions: dict[str, FuzzyPartition],
    weight_kind: str = "penalized_cf",
    inference: str = "single_winner",
) -> FuzzyRuleBase:
    """One candidate rule per training row from its best-matching labels.

    Rows sharing an antecedent collapse into one rule whose consequent is
    the class of highest confidence over all training rows.
    """
    if weight_kind not in WEIGHT_KINDS:
        raise ValueError(f"weight_kind must be one of {WEIGHT_KINDS}")
    if ds.n_rows == 0:
        raise EmptyDataset("cannot learn rules from an empty dataset")
    missing = [f for f in ds.names if f not in partitions]
    if missing:
        raise ValueError(f"no partition for feature {missing[0]!r}")

    parts = [partitions[f] for f in ds.names]
    memberships = [p.memberships(ds.X[:, j]) for j, p in enumerate(parts)]
    best = np.stack([np.argmax(m, axis=1) for m in memberships], axis=1)
    keys = np.unique(best, axis=0)

    y = ds.y
    rules = []
    for key in keys:
        rows, act = _rule_activation(memberships, key, ds.n_rows)
        total = act.sum()
        conf = np.array([act[y[rows] == c].sum() for c in (NEGATIVE, POSITIVE)]) / total
        cls = int(np.argmax(conf))
        w = conf[cls]
        if weight_kind == "penalized_cf":
            w = w - conf[1 - cls]
        if w <= 0:
            continue
        ante = tuple((f, int(l)) for f, l in zip(ds.names, key))
        rules.append(FuzzyRule(ante, cls, float(min(w, 1.0))))

    return FuzzyRuleBase(
        ds.names,
        rules,
        partitions={f: partitions[f] for f in ds.names},
        inference=inference,
        fallback="majority_class",
        default_class=_majority(y),
        class_names=(ds.schema.negative_label, ds.schema.positive_label),
        name="chi",
    )
