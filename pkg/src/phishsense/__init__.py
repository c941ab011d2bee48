"""phishsense: phishing-website detection with filter feature selection,
crisp learners (C4.5-style tree, random forest, MLP) and fuzzy rule-based
learners (Chi, furia-lite, fuzzy AdaBoost)."""

__version__ = "0.1.0"

from .dataset import NEGATIVE, POSITIVE, Dataset, FeatureSchema, load, load_arff, load_csv, stratified_kfold
from .evaluation import Confusion, ExperimentReport, accuracy, cross_validate, evaluate, run_grid
from .learners import LearnerConfig, TrainedModel, load_model
from .selection import FeatureRanking, FeatureSet, combine, rank_infogain, rank_relieff, top_k
from .url import LexicalVector, extract_lexical, parse_url

__all__ = [
    "NEGATIVE", "POSITIVE", "Confusion", "Dataset", "ExperimentReport", "FeatureRanking", "FeatureSchema",
    "FeatureSet", "LearnerConfig", "LexicalVector", "TrainedModel", "accuracy", "combine", "cross_validate",
    "evaluate", "extract_lexical", "load", "load_arff", "load_csv", "load_model", "parse_url",
    "rank_infogain", "rank_relieff", "run_grid", "stratified_kfold", "top_k",
]
