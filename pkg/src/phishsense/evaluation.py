"""Accuracy, confusion matrices, cross-validation and the learner x
feature-set experiment grid."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import fmean

import numpy as np

from .dataset import NEGATIVE, POSITIVE, Dataset, derive_seed, project_features, stratified_kfold
from .errors import EmptyEvaluation, SchemaMismatch
from .learners import LearnerConfig
from .selection import FeatureSet

REPORT_VERSION = 1
CSV_COLUMNS = ("learner", "feature_set", "fold", "kind", "tp", "tn", "fp", "fn", "accuracy", "train_ms", "test_ms")


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @classmethod
    def tally(cls, truth, predicted) -> "Confusion":
        t = np.asarray(truth)
        p = np.asarray(predicted)
        return cls(
            tp=int(((t == POSITIVE) & (p == POSITIVE)).sum()),
            tn=int(((t == NEGATIVE) & (p == NEGATIVE)).sum()),
            fp=int(((t == NEGATIVE) & (p == POSITIVE)).sum()),
            fn=int(((t == POSITIVE) & (p == NEGATIVE)).sum()),
        )

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)


def accuracy(c: Confusion) -> float:
    """Correct predictions over all evaluated rows."""
    if c.total <= 0:
        raise EmptyEvaluation("accuracy of an empty evaluation")
    return (c.tp + c.tn) / c.total


def error_rate(c: Confusion) -> float:
    if c.total <= 0:
        raise EmptyEvaluation("error rate of an empty evaluation")
    return (c.fp + c.fn) / c.total


@dataclass(frozen=True)
class EvalResult:
    confusion: Confusion
    train_ms: int = 0
    test_ms: int = 0

    @property
    def accuracy(self) -> float:
        return accuracy(self.confusion)


def _ms(seconds: float) -> int:
    return int(round(seconds * 1000))


def evaluate(model, test: Dataset, train_seconds: float = 0.0) -> EvalResult:
    """Tally a confusion matrix (positive = phishing) on a held-out dataset."""
    if test.n_rows == 0:
        raise EmptyEvaluation("test set is empty")
    features = getattr(model, "features", None)
    if features is not None and tuple(features) != tuple(test.names):
        raise SchemaMismatch("test features differ from the training features")
    start = time.perf_counter()
    labels, _ = model.predict(test.X)
    elapsed = time.perf_counter() - start
    return EvalResult(Confusion.tally(test.y, labels), _ms(train_seconds), _ms(elapsed))


def fold_seed(seed: int, fold: int) -> int:
    return derive_seed(seed, fold)


def run_fold(learner: LearnerConfig, ds: Dataset, plan, fold: int) -> EvalResult:
    train = ds.take(plan.train_rows(fold))
    test = ds.take(plan.test_rows(fold))
    start = time.perf_counter()
    model = learner.fit(train, fold_seed(plan.seed, fold))
    return evaluate(model, test, time.perf_counter() - start)


@dataclass(frozen=True)
class CVResult:
    folds: tuple[EvalResult, ...]

    @property
    def mean_accuracy(self) -> float:
        return fmean(r.accuracy for r in self.folds)


def cross_validate(learner: LearnerConfig, ds: Dataset, k: int = 10, seed: int = 42) -> CVResult:
    """Stratified k-fold CV; every statistic a learner needs (medians, ranges,
    partitions, thresholds) comes from the k-1 training folds."""
    plan = stratified_kfold(ds, k, seed)
    return CVResult(tuple(run_fold(learner, ds, plan, f) for f in range(k)))


@dataclass
class ExperimentReport:
    learners: list[LearnerConfig]
    feature_sets: list[FeatureSet]
    k: int
    seed: int
    cells: dict[tuple[str, str], list[EvalResult]] = field(default_factory=dict)

    def set_id(self, fs: FeatureSet) -> str:
        return fs.provenance

    def cell_mean(self, learner_id: str, set_id: str) -> float:
        return fmean(r.accuracy for r in self.cells[(learner_id, set_id)])

    def learner_average(self, learner_id: str) -> float:
        return fmean(self.cell_mean(learner_id, fs.provenance) for fs in self.feature_sets)

    def learner_build_ms(self, learner_id: str) -> int:
        return sum(r.train_ms for (lid, _), rs in self.cells.items() if lid == learner_id for r in rs)

    def is_complete(self) -> bool:
        return all(
            len(self.cells.get((l.id, fs.provenance), ())) == self.k
            for l in self.learners
            for fs in self.feature_sets
        )

    def without_timings(self) -> "ExperimentReport":
        cells = {key: [replace(r, train_ms=0, test_ms=0) for r in rs] for key, rs in self.cells.items()}
        return ExperimentReport(list(self.learners), list(self.feature_sets), self.k, self.seed, cells)

    def ranked_learners(self) -> list[LearnerConfig]:
        return sorted(self.learners, key=lambda l: (-self.learner_average(l.id), l.id))

    def __eq__(self, other):
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return (
            self.learners == other.learners
            and [(f.provenance, f.names) for f in self.feature_sets]
            == [(f.provenance, f.names) for f in other.feature_sets]
            and self.k == other.k
            and self.seed == other.seed
            and self.cells == other.cells
        )


def _cell_task(args):
    learner, ds, set_names, k, seed, fold = args
    sub = project_features(ds, set_names)
    plan = stratified_kfold(sub, k, seed)
    return run_fold(learner, sub, plan, fold)


def run_grid(
    ds: Dataset,
    learners: list[LearnerConfig],
    feature_sets: list[FeatureSet],
    k: int = 10,
    seed: int = 42,
    jobs: int = 1,
    progress=None,
) -> ExperimentReport:
    """Cross-validate every learner on every feature-set projection.

    Each (learner, set, fold) cell depends only on its own inputs, so cells
    may run in any order or in parallel without changing results.
    """
    if not learners or not feature_sets:
        raise ValueError("need at least one learner and one feature set")
    ids = [l.id for l in learners]
    if len(set(ids)) != len(ids):
        raise ValueError("learner ids must be unique")
    set_ids = [fs.provenance for fs in feature_sets]
    if len(set(set_ids)) != len(set_ids):
        raise ValueError("feature set ids must be unique")
    for fs in feature_sets:
        ds.schema.subset(fs.names)
    stratified_kfold(ds, k, seed)

    tasks, keys = [], []
    for l in learners:
        for fs in feature_sets:
            for fold in range(k):
                tasks.append((l, ds, fs.names, k, seed, fold))
                keys.append((l.id, fs.provenance))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_task, tasks))
    else:
        results = []
        for i, t in enumerate(tasks):
            results.append(_cell_task(t))
            if progress:
                progress(i + 1, len(tasks), keys[i])
    report = ExperimentReport(list(learners), list(feature_sets), k, seed)
    for key, r in zip(keys, results):
        report.cells.setdefault(key, []).append(r)
    return report


# ------------------------------------------------------------------ rendering


def _row(learner, set_id, fold, kind, c: Confusion, acc, train_ms, test_ms):
    return {
        "learner": learner, "feature_set": set_id, "fold": fold, "kind": kind,
        "tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
        "accuracy": acc, "train_ms": train_ms, "test_ms": test_ms,
    }


def report_rows(r: ExperimentReport) -> list[dict]:
    """Fold rows, then one mean row per cell and one average row per learner."""
    rows = []
    for l in r.learners:
        for fs in r.feature_sets:
            for fold, res in enumerate(r.cells[(l.id, fs.provenance)]):
                rows.append(_row(l.id, fs.provenance, fold, "fold", res.confusion, res.accuracy,
                                 res.train_ms, res.test_ms))
    for l in r.learners:
        for fs in r.feature_sets:
            rs = r.cells[(l.id, fs.provenance)]
            total = sum((x.confusion for x in rs), Confusion())
            rows.append(_row(l.id, fs.provenance, "*", "cell_mean", total, r.cell_mean(l.id, fs.provenance),
                             sum(x.train_ms for x in rs), sum(x.test_ms for x in rs)))
    for l in r.learners:
        rs = [x for fs in r.feature_sets for x in r.cells[(l.id, fs.provenance)]]
        total = sum((x.confusion for x in rs), Confusion())
        rows.append(_row(l.id, "*", "*", "learner_average", total, r.learner_average(l.id),
                         r.learner_build_ms(l.id), sum(x.test_ms for x in rs)))
    return rows


def _render_csv(r: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in report_rows(r):
        row = dict(row, accuracy=repr(float(row["accuracy"])))
        w.writerow(row)
    return buf.getvalue()


def report_to_dict(r: ExperimentReport) -> dict:
    return {
        "report_version": REPORT_VERSION,
        "k": r.k,
        "seed": r.seed,
        "learners": [{"id": l.id, "learner": l.learner, "params": dict(l.params)} for l in r.learners],
        "feature_sets": [{"id": fs.provenance, "names": list(fs.names)} for fs in r.feature_sets],
        "results": [row for row in report_rows(r) if row["kind"] == "fold"],
        "aggregates": [row for row in report_rows(r) if row["kind"] != "fold"],
    }


def report_from_dict(d: dict) -> ExperimentReport:
    if d.get("report_version") != REPORT_VERSION:
        raise ValueError(f"unsupported report_version {d.get('report_version')!r}")
    learners = [
        LearnerConfig(l["learner"], tuple(l["params"].items()), None if l["id"] == l["learner"] else l["id"])
        for l in d["learners"]
    ]
    sets = [FeatureSet(tuple(f["names"]), f["id"]) for f in d["feature_sets"]]
    report = ExperimentReport(learners, sets, d["k"], d["seed"])
    for row in sorted(d["results"], key=lambda x: x["fold"]):
        res = EvalResult(Confusion(row["tp"], row["tn"], row["fp"], row["fn"]), row["train_ms"], row["test_ms"])
        report.cells.setdefault((row["learner"], row["feature_set"]), []).append(res)
    return report


def report_from_json(text: str) -> ExperimentReport:
    return report_from_dict(json.loads(text))


def _render_table(r: ExperimentReport, timings: bool) -> str:
    set_ids = [fs.provenance for fs in r.feature_sets]
    head = ["learner"] + set_ids + ["average"] + (["build_ms"] if timings else [])
    body = []
    for l in r.ranked_learners():
        cells = [f"{100 * r.cell_mean(l.id, s):.2f}" for s in set_ids]
        row = [l.id] + cells + [f"{100 * r.learner_average(l.id):.2f}"]
        if timings:
            row.append(str(r.learner_build_ms(l.id)))
        body.append(row)
    widths = [max(len(x[i]) for x in [head] + body) for i in range(len(head))]
    lines = [
        f"# accuracy (%) of {len(r.learners)} learners x {len(set_ids)} feature sets, "
        f"{r.k}-fold stratified CV, seed {r.seed}"
    ]
    for row in [head] + body:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))))
    return "\n".join(lines) + "\n"


def render_report(r: ExperimentReport, fmt: str = "table", timings: bool = False) -> str:
    """``timings=False`` zeroes wall-clock fields so output is byte-reproducible."""
    if not r.is_complete():
        raise ValueError("report has missing cells")
    if not timings:
        r = r.without_timings()
    if fmt == "table":
        return _render_table(r, timings)
    if fmt == "csv":
        return _render_csv(r)
    if fmt == "json":
        return json.dumps(report_to_dict(r), indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
