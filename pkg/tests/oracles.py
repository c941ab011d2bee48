"""Slow, loop-based reference implementations used as test oracles.

They deliberately share no code with the package.
"""

import math
from collections import Counter


def entropy(labels) -> float:
    n = len(labels)
    h = 0.0
    for c in Counter(labels).values():
        p = c / n
        h -= p * math.log2(p)
    return h


def mdl_cuts(values, labels):
    """Fayyad-Irani recursion, trying every boundary between distinct values."""
    pairs = sorted(zip(values, labels), key=lambda t: t[0])
    out = []
    _recurse(pairs, out)
    return sorted(out)


def _recurse(pairs, out):
    n = len(pairs)
    labels = [l for _, l in pairs]
    best = None
    for i in range(1, n):
        if pairs[i][0] == pairs[i - 1][0]:
            continue
        left, right = labels[:i], labels[i:]
        e = (len(left) * entropy(left) + len(right) * entropy(right)) / n
        if best is None or e < best[0] - 1e-12:
            best = (e, i)
    if best is None:
        return
    e, i = best
    left, right = labels[:i], labels[i:]
    ent = entropy(labels)
    k, k1, k2 = len(set(labels)), len(set(left)), len(set(right))
    delta = math.log2(3**k - 2) - (k * ent - k1 * entropy(left) - k2 * entropy(right))
    if ent - e <= (math.log2(n - 1) + delta) / n:
        return
    a, b = pairs[i - 1][0], pairs[i][0]
    mid = (a + b) / 2
    out.append(a if mid >= b else mid)
    _recurse(pairs[:i], out)
    _recurse(pairs[i:], out)


def info_gain(values, labels):
    cuts = mdl_cuts(values, labels)
    bins = {}
    for v, l in zip(values, labels):
        b = sum(1 for c in cuts if v > c)
        bins.setdefault(b, []).append(l)
    n = len(labels)
    return entropy(labels) - sum(len(ls) / n * entropy(ls) for ls in bins.values())


def relieff(X, y, k):
    """ReliefF with Manhattan distance over range-scaled features, prior-weighted misses."""
    n, m = len(X), len(X[0])
    lo = [min(r[j] for r in X) for j in range(m)]
    hi = [max(r[j] for r in X) for j in range(m)]

    def diff(j, a, b):
        span = hi[j] - lo[j]
        return 0.0 if span == 0 else abs(X[a][j] - X[b][j]) / span

    def dist(a, b):
        return sum(diff(j, a, b) for j in range(m))

    prior = {c: y.count(c) / n for c in set(y)}
    w = [0.0] * m
    for i in range(n):
        by_class = {}
        for r in range(n):
            if r != i:
                by_class.setdefault(y[r], []).append((dist(i, r), r))
        for c, cand in by_class.items():
            near = [r for _, r in sorted(cand)[:k]]
            for j in range(m):
                s = sum(diff(j, i, r) for r in near) / (n * k)
                if c == y[i]:
                    w[j] -= s
                else:
                    w[j] += prior[c] / (1 - prior[y[i]]) * s
    return w
