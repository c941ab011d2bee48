"""Fuzzy rule-based classifiers: grid partitions, Chi, furia-lite and boosted rules."""

from .boost import adaboost_fuzzy_learn
from .chi import chi_learn
from .furia import furia_learn
from .partition import FuzzyPartition, Trapezoid, build_uniform_partitions, membership
from .rules import FuzzyEnsemble, FuzzyRule, FuzzyRuleBase, dumps, fuzzy_classify, loads

__all__ = [
    "FuzzyEnsemble",
    "FuzzyPartition",
    "FuzzyRule",
    "FuzzyRuleBase",
    "Trapezoid",
    "adaboost_fuzzy_learn",
    "build_uniform_partitions",
    "chi_learn",
    "dumps",
    "furia_learn",
    "fuzzy_classify",
    "loads",
    "membership",
]
