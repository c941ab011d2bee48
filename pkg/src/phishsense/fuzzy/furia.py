"""furia-lite: unordered fuzzy interval rules.

Per class (one-vs-rest) crisp interval rules are grown with FOIL gain,
pruned back on a held-out split and collected until a rule's prune-set
precision drops to one half. Each interval is then widened into a
trapezoid whose core is the crisp interval. Compared with FURIA there is
no MDL rule-set optimisation pass, and stretching drops antecedents from
the end of the rule only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, NEGATIVE, POSITIVE, derive_seed, rng_for
from ..errors import EmptyDataset, SingleClassDataset
from .partition import Trapezoid
from .rules import FuzzyRule, FuzzyRuleBase, _majority

GAIN_EPS = 1e-12


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str  # "<=" or ">="
    threshold: float

    def covers(self, X: np.ndarray) -> np.ndarray:
        col = X[:, self.feature]
        return col <= self.threshold if self.op == "<=" else col >= self.threshold


def _covers(conds, X) -> np.ndarray:
    mask = np.ones(X.shape[0], dtype=bool)
    for c in conds:
        mask &= c.covers(X)
    return mask


def _foil(p1, n1, p0, n0):
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p1 * (np.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))
    return np.where(p1 > 0, g, -np.inf)


def _best_condition(X, pos, min_covered):
    """Highest-FOIL-gain threshold test over the rows of X (all covered)."""
    p0 = float(pos.sum())
    n0 = float(pos.size - p0)
    best = None
    best_gain = GAIN_EPS
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        v = X[order, j]
        cut = np.flatnonzero(v[1:] > v[:-1])
        if cut.size == 0:
            continue
        cp = np.cumsum(pos[order])[cut].astype(np.float64)
        cn = (cut + 1) - cp
        thr = (v[cut] + v[cut + 1]) / 2.0
        for op, p1, n1 in (("<=", cp, cn), (">=", p0 - cp, n0 - cn)):
            g = _foil(p1, n1, p0, n0)
            g[p1 < min_covered] = -np.inf
            i = int(np.argmax(g))
            if g[i] > best_gain + GAIN_EPS:
                best_gain = float(g[i])
                best = Condition(j, op, float(thr[i]))
    return best


def grow_rule(X, pos, min_covered=1) -> list[Condition]:
    conds: list[Condition] = []
    covered = np.ones(X.shape[0], dtype=bool)
    while (~pos[covered]).any():
        c = _best_condition(X[covered], pos[covered], min_covered)
        if c is None:
            break
        conds.append(c)
        covered &= c.covers(X)
    return conds


def prune_value(p: float, n: float) -> float:
    return (p - n + 1.0) / (p + n + 2.0)


def prune_rule(conds, X, pos) -> list[Condition]:
    """Keep the prefix maximising (p - n + 1) / (p + n + 2) on the prune rows."""
    if len(conds) <= 1:
        return list(conds)
    best_len, best_val = len(conds), -math.inf
    mask = np.ones(X.shape[0], dtype=bool)
    vals = []
    for c in conds:
        mask = mask & c.covers(X)
        p = float(pos[mask].sum())
        vals.append(prune_value(p, float(mask.sum()) - p))
    best_val = max(vals)
    best_len = vals.index(best_val) + 1
    return list(conds[:best_len])


def _split(rows, pos, ratio, rng):
    grow, prune = [], []
    for sel in (rows[pos[rows]], rows[~pos[rows]]):
        sel = rng.permutation(sel)
        cut = int(math.ceil(ratio * sel.size))
        grow.append(sel[:cut])
        prune.append(sel[cut:])
    return np.sort(np.concatenate(grow)), np.sort(np.concatenate(prune))


def learn_crisp_rules(X, pos, grow_ratio=2 / 3, min_covered=1, seed=42, max_rules=None):
    """Sequential covering of the positive rows; covered positives are removed."""
    remaining = np.arange(X.shape[0])
    rng = rng_for(seed)
    rules = []
    while pos[remaining].any():
        if max_rules is not None and len(rules) >= max_rules:
            break
        grow, prune = _split(remaining, pos, grow_ratio, rng)
        if prune.size == 0:
            prune = grow
        conds = grow_rule(X[grow], pos[grow], min_covered)
        if not conds:
            break
        conds = prune_rule(conds, X[prune], pos[prune])
        m = _covers(conds, X[prune])
        covered = int(m.sum())
        precision = float(pos[prune][m].sum()) / covered if covered else 0.0
        if precision <= 0.5:
            break
        rules.append(conds)
        hit = _covers(conds, X[remaining])
        before = remaining.size
        remaining = remaining[~(hit & pos[remaining])]
        if remaining.size == before:
            break
    return rules


def _intervals(conds):
    """Merge threshold tests into one closed interval per feature, in
    order of each feature's first appearance."""
    bounds: dict[int, list[float]] = {}
    for c in conds:
        lo, hi = bounds.setdefault(c.feature, [-math.inf, math.inf])
        if c.op == "<=":
            bounds[c.feature][1] = min(hi, c.threshold)
        else:
            bounds[c.feature][0] = max(lo, c.threshold)
    return [(j, lo, hi) for j, (lo, hi) in bounds.items()]


def _laplace(p, n):
    return (p + 1.0) / (p + n + 2.0)


def _best_support(x, w, pos, fixed, core_edge, side):
    """Pick the support end on one side of the core maximising Laplace purity.

    ``fixed`` is the membership of every row from the rest of the trapezoid
    (rows outside the core on ``side`` are recomputed per candidate).
    Returns the support bound; the core edge itself means no widening.
    """
    if side == "lo":
        beyond = x < core_edge
    else:
        beyond = x > core_edge
    inside = ~beyond
    base_p = float((w * fixed)[inside & pos].sum())
    base_n = float((w * fixed)[inside & ~pos].sum())
    best_s, best_val = core_edge, _laplace(base_p, base_n)

    cand_mask = beyond & (w > 0)
    if not cand_mask.any():
        return best_s
    xs, ws, ps = x[cand_mask], w[cand_mask], pos[cand_mask]
    order = np.argsort(xs if side == "hi" else -xs, kind="stable")
    xs, ws, ps = xs[order], ws[order], ps[order]
    # rows ordered by distance from the core; candidate s = each distinct value
    dist = np.abs(xs - core_edge)
    wp, wn = np.where(ps, ws, 0.0), np.where(ps, 0.0, ws)
    cwp, cwn = np.cumsum(wp), np.cumsum(wn)
    cdp, cdn = np.cumsum(wp * dist), np.cumsum(wn * dist)
    last = np.flatnonzero(np.r_[dist[1:] > dist[:-1], True])
    for i in last:
        s_dist = dist[i]
        # rows strictly closer than the candidate contribute 1 - d / s_dist
        k = np.searchsorted(dist, s_dist, side="left")
        if k == 0:
            p_add = n_add = 0.0
        else:
            p_add = cwp[k - 1] - cdp[k - 1] / s_dist
            n_add = cwn[k - 1] - cdn[k - 1] / s_dist
        val = _laplace(base_p + p_add, base_n + n_add)
        if val > best_val + GAIN_EPS:
            best_val = val
            best_s = float(xs[i])
    return best_s


def fuzzify(conds, X, pos) -> list[tuple[int, Trapezoid]]:
    """Widen each crisp interval into a trapezoid, antecedent by antecedent."""
    ante = [(j, Trapezoid(lo, lo, hi, hi)) for j, lo, hi in _intervals(conds)]
    n = X.shape[0]
    for i, (j, trap) in enumerate(ante):
        w = np.ones(n)
        for k, (jj, tt) in enumerate(ante):
            if k != i:
                w *= tt(X[:, jj])
        x = X[:, j]
        lo, hi = trap.core_lo, trap.core_hi
        s_lo, s_hi = trap.support_lo, trap.support_hi
        if math.isfinite(lo):
            fixed = Trapezoid(-math.inf, -math.inf, hi, s_hi)(x)
            s_lo = _best_support(x, w, pos, fixed, lo, "lo")
        if math.isfinite(hi):
            fixed = Trapezoid(s_lo, lo, math.inf, math.inf)(x)
            s_hi = _best_support(x, w, pos, fixed, hi, "hi")
        ante[i] = (j, Trapezoid(s_lo, lo, hi, s_hi))
    return ante


def _certainty(act, pos):
    return _laplace(float(act[pos].sum()), float(act[~pos].sum()))


def furia_learn(
    ds: Dataset,
    grow_ratio: float = 2 / 3,
    min_covered: int = 1,
    seed: int = 42,
    max_rules_per_class: int | None = None,
) -> FuzzyRuleBase:
    if ds.n_rows == 0:
        raise EmptyDataset("cannot learn rules from an empty dataset")
    neg, pos_count = ds.class_counts()
    if neg == 0 or pos_count == 0:
        raise SingleClassDataset("both classes must be present")
    X = ds.X
    rules: list[FuzzyRule] = []
    for cls in (NEGATIVE, POSITIVE):
        pos = ds.y == cls
        crisp = learn_crisp_rules(
            X, pos, grow_ratio, min_covered, derive_seed(seed, cls), max_rules_per_class
        )
        for conds in crisp:
            ante = fuzzify(conds, X, pos)
            prefix = np.ones(ds.n_rows)
            stretch = [_certainty(prefix, pos)]
            for j, trap in ante:
                prefix = prefix * trap(X[:, j])
                stretch.append(_certainty(prefix, pos))
            named = tuple((ds.names[j], trap) for j, trap in ante)
            rules.append(FuzzyRule(named, cls, stretch[-1], tuple(stretch)))
    return FuzzyRuleBase(
        ds.names,
        rules,
        partitions=None,
        inference="additive_vote",
        fallback="rule_stretching",
        default_class=_majority(ds.y),
        class_names=(ds.schema.negative_label, ds.schema.positive_label),
        name="furia-lite",
    )
