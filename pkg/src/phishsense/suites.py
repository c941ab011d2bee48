"""Feature-set specifications and the two reproduction grids.

A feature-set spec is one of ``all``, ``ig-topK`` (Information Gain),
``rf-topK`` (ReliefF), ``union``/``intersection`` of the two top-15 lists
(``union-K`` for another size), ``lexical`` (columns computable from a raw
URL) or ``file:PATH`` (one name per line).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import Dataset
from .errors import DataError
from .learners import LearnerConfig
from .selection import FeatureRanking, FeatureSet, combine, rank_infogain, rank_relieff, top_k
from .url import match_corpus_features

UNION_TOP = 15

PAPER_ML_SETS = (
    "all", "ig-top5", "ig-top10", "ig-top15", "rf-top5", "rf-top10", "rf-top15", "union", "intersection",
)
PAPER_FUZZY_SETS = ("ig-top5", "ig-top10", "rf-top5", "rf-top10", "union", "intersection", "all")
SUITES = {
    "paper-ml": (("j48", "rf", "mlp"), PAPER_ML_SETS),
    "paper-fuzzy": (("chi", "furia-lite", "fuzzy-adaboost"), PAPER_FUZZY_SETS),
}

_TOP = re.compile(r"^(ig|rf)-top(\d+)$")
_COMBINED = re.compile(r"^(union|intersection)(?:-(\d+))?$")


@dataclass
class Rankings:
    """Lazily computed rankings of one dataset, shared by every spec."""

    ds: Dataset
    seed: int = 42
    k_neighbors: int = 10
    sample_count: int | str = "all"
    _cache: dict = field(default_factory=dict)

    def get(self, method: str) -> FeatureRanking:
        if method not in self._cache:
            if method == "ig":
                self._cache[method] = rank_infogain(self.ds)
            else:
                self._cache[method] = rank_relieff(self.ds, self.k_neighbors, self.sample_count, self.seed)
        return self._cache[method]


def resolve(spec: str, rankings: Rankings) -> FeatureSet:
    ds = rankings.ds
    universe = ds.names
    if spec == "all":
        return FeatureSet(universe, "all", universe)
    m = _TOP.match(spec)
    if m:
        s = top_k(rankings.get(m.group(1)), int(m.group(2)), universe)
        return FeatureSet(s.names, spec, universe)
    m = _COMBINED.match(spec)
    if m:
        k = int(m.group(2) or UNION_TOP)
        a = top_k(rankings.get("ig"), k, universe)
        b = top_k(rankings.get("rf"), k, universe)
        s = combine(a, b, m.group(1))
        return FeatureSet(s.names, spec, universe)
    if spec == "lexical":
        names = tuple(n for n in universe if n in match_corpus_features(universe))
        if not names:
            raise DataError("no dataset column matches a lexical URL feature")
        return FeatureSet(names, "lexical", universe)
    if spec.startswith("file:"):
        path = Path(spec[5:])
        try:
            fs = FeatureSet.read(path, universe)
        except OSError as exc:
            raise DataError(f"{path}: {exc.strerror or exc}") from None
        return fs
    raise DataError(f"unknown feature-set spec {spec!r}")


def suite(name: str, rankings: Rankings) -> tuple[list[LearnerConfig], list[FeatureSet]]:
    if name not in SUITES:
        raise DataError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    learners, sets = SUITES[name]
    return [LearnerConfig(l) for l in learners], [resolve(s, rankings) for s in sets]
