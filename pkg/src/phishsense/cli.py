"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error (bad or unreadable
input), 3 internal error.  Diagnostics go to stderr, results to stdout or
the ``--out`` file.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DEFAULT_CLASS_COLUMN, DEFAULT_DROP_COLUMNS, POSITIVE, load, project_features
from .errors import DataError, ModelFormatError, UrlError
from .evaluation import cross_validate, evaluate, render_report, run_grid, ExperimentReport
from .learners import DEFAULTS, LearnerConfig, TrainedModel, load_model
from .selection import FeatureSet, combine, rank_infogain, rank_relieff, top_k
from .suites import SUITES, Rankings, resolve, suite
from .url import lexical_features_for, url_matrix_row

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
HELP_WIDTH = 88


class UsageError(Exception):
    pass


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    """Fixed width so help text does not depend on the terminal."""

    def __init__(self, prog):
        super().__init__(prog, width=HELP_WIDTH, max_help_position=32)

    def _get_help_string(self, action):
        text = action.help or ""
        if not action.option_strings or action.default is argparse.SUPPRESS or "default" in text:
            return text
        if action.required:
            return text + " (required)"
        return text + " (default: %(default)s)"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _jobs_default() -> int:
    env = os.environ.get("PHISHSENSE_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="dataset (.csv or .arff)")
    p.add_argument("--class-column", default=DEFAULT_CLASS_COLUMN, help="name of the class column")
    p.add_argument("--positive-label", default="phishing", help="class value read as positive")
    p.add_argument("--negative-label", default="legitimate", help="class value read as negative")
    p.add_argument("--drop-columns", default=",".join(DEFAULT_DROP_COLUMNS),
                   help="comma-separated columns to ignore, such as row ids")


def _add_out(p):
    p.add_argument("--out", default="-", help="output file, '-' for stdout")


def _add_selection(p):
    p.add_argument("--k-neighbors", type=int, default=10, help="ReliefF neighbours per class")
    p.add_argument("--samples", default="all", help="ReliefF sampled rows ('all' or a count)")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="phishsense", formatter_class=_Formatter,
                   description="Phishing-website detection: feature selection, crisp and fuzzy learners, "
                               "experiment grids and live URL classification.")
    root.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = root.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest-check", help="load a dataset and summarise it", formatter_class=_Formatter)
    _add_data(p)
    _add_out(p)

    p = sub.add_parser("select", help="rank features by Information Gain or ReliefF", formatter_class=_Formatter)
    _add_data(p)
    p.add_argument("--method", choices=("infogain", "relieff"), default="infogain", help="ranking method")
    p.add_argument("--top", type=int, default=None, help="keep only the K best features (default: all of them)")
    p.add_argument("--discretizer", choices=("mdl", "equal-frequency"), default="mdl",
                   help="binning used by Information Gain")
    _add_selection(p)
    p.add_argument("--seed", type=int, default=42, help="seed for ReliefF sampling")
    _add_out(p)

    p = sub.add_parser("combine", help="union or intersection of two feature files", formatter_class=_Formatter)
    p.add_argument("--a", required=True, help="first feature or ranking file")
    p.add_argument("--b", required=True, help="second feature or ranking file")
    p.add_argument("--mode", choices=("union", "intersection"), default="union", help="set operation")
    p.add_argument("--top", type=int, default=None, help="truncate each ranking to K names first (default: no truncation)")
    _add_out(p)

    p = sub.add_parser("train", help="fit one learner and save the model", formatter_class=_Formatter)
    _add_data(p)
    p.add_argument("--learner", choices=tuple(DEFAULTS), default="rf", help="learner id")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="learner parameter override, repeatable (default: none)")
    p.add_argument("--features", default="all", help="feature-set spec: all, ig-topK, rf-topK, union, "
                                                     "intersection, lexical or file:PATH")
    _add_selection(p)
    p.add_argument("--seed", type=int, default=42, help="random seed")
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("evaluate", help="cross-validate a learner or score a saved model",
                       formatter_class=_Formatter)
    _add_data(p)
    p.add_argument("--model", default=None, help="score this saved model on --data instead of running CV (default: run CV)")
    p.add_argument("--learner", choices=tuple(DEFAULTS), default="rf", help="learner id for CV")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="learner parameter override, repeatable (default: none)")
    p.add_argument("--features", default="all", help="feature-set spec for CV")
    p.add_argument("--k", type=int, default=10, help="number of folds")
    _add_selection(p)
    p.add_argument("--seed", type=int, default=42, help="random seed")
    p.add_argument("--format", choices=("table", "csv", "json"), default=None,
                   help="report format (default: from --out suffix, else table)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")
    _add_out(p)

    p = sub.add_parser("grid", help="cross-validate learners x feature sets", formatter_class=_Formatter)
    _add_data(p)
    p.add_argument("--suite", choices=tuple(SUITES), default=None,
                   help="predefined grid overriding --learners and --feature-sets (default: none)")
    p.add_argument("--learners", default="j48,rf,mlp", help="comma-separated learner ids")
    p.add_argument("--feature-sets", default="all", help="comma-separated feature-set specs")
    p.add_argument("--k", type=int, default=10, help="number of folds")
    _add_selection(p)
    p.add_argument("--seed", type=int, default=42, help="random seed")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: $PHISHSENSE_JOBS, else all cores)")
    p.add_argument("--format", choices=("table", "csv", "json"), default=None,
                   help="report format (default: from --out suffix, else table)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (not reproducible)")
    _add_out(p)

    p = sub.add_parser("classify-url", help="classify raw URLs with a lexical-feature model",
                       formatter_class=_Formatter)
    p.add_argument("--model", required=True, help="model trained on lexical features only")
    p.add_argument("--in", dest="inp", default="-", help="file with one URL per line, '-' for stdin")
    _add_out(p)

    p = sub.add_parser("explain", help="show how a model decides one instance", formatter_class=_Formatter)
    p.add_argument("--model", required=True, help="saved model")
    p.add_argument("--data", default=None, help="dataset holding the instance (default: none, use --url)")
    p.add_argument("--row", type=int, default=1, help="1-based data row of --data")
    p.add_argument("--url", default=None, help="explain a raw URL instead of a dataset row (default: none)")
    p.add_argument("--class-column", default=DEFAULT_CLASS_COLUMN, help="name of the class column")
    p.add_argument("--positive-label", default="phishing", help="class value read as positive")
    p.add_argument("--negative-label", default="legitimate", help="class value read as negative")
    p.add_argument("--drop-columns", default=",".join(DEFAULT_DROP_COLUMNS),
                   help="comma-separated columns to ignore, such as row ids")
    _add_out(p)
    return root


# ------------------------------------------------------------------ helpers


def _load_data(args):
    try:
        drop = tuple(c.strip() for c in args.drop_columns.split(",") if c.strip())
        return load(args.data, class_column=args.class_column, positive_label=args.positive_label,
                    negative_label=args.negative_label, drop_columns=drop)
    except OSError as exc:
        raise DataError(f"{args.data}: {exc.strerror or exc}") from None
    except DataError as exc:
        msg = str(exc)
        raise DataError(msg if msg.startswith(str(args.data)) else f"{args.data}: {msg}") from None


def _load_model(path) -> TrainedModel:
    try:
        return load_model(path)
    except OSError as exc:
        raise DataError(f"{path}: cannot read model: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path}: not a text model file") from None
    except (ModelFormatError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _write(args, text: str):
    if args.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"{args.out}: {exc.strerror or exc}") from None


def _samples(value: str):
    if value == "all":
        return "all"
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"--samples must be 'all' or a positive integer, got {value!r}") from None
    if n <= 0:
        raise UsageError("--samples must be positive")
    return n


def _rankings(args, ds) -> Rankings:
    return Rankings(ds, args.seed, args.k_neighbors, _samples(args.samples))


def _format(args) -> str:
    if args.format:
        return args.format
    suffix = Path(args.out).suffix.lower() if args.out != "-" else ""
    return {".csv": "csv", ".json": "json"}.get(suffix, "table")


def _learner(args) -> LearnerConfig:
    try:
        return LearnerConfig.parse(args.learner, args.param)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_set(path, top):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    fs = FeatureSet.from_text(text, provenance=Path(path).stem)
    if top is not None:
        if not 1 <= top <= len(fs):
            raise UsageError(f"--top must lie in [1, {len(fs)}] for {path}")
        fs = FeatureSet(fs.names[:top], fs.provenance)
    return fs


# ------------------------------------------------------------------ commands


def cmd_ingest_check(args):
    ds = _load_data(args)
    neg, pos = ds.class_counts()
    kinds = [k for _, k in ds.schema.features]
    missing = int(np.isnan(ds.X).sum())
    lines = [
        f"file\t{args.data}",
        f"rows\t{ds.n_rows}",
        f"features\t{ds.n_features}",
        f"binary_features\t{kinds.count('binary')}",
        f"numeric_features\t{kinds.count('numeric')}",
        f"class_column\t{ds.schema.class_attribute}",
        f"{ds.schema.negative_label}\t{neg}",
        f"{ds.schema.positive_label}\t{pos}",
        f"missing_cells\t{missing}",
    ]
    _write(args, "\n".join(lines) + "\n")


def cmd_select(args):
    ds = _load_data(args)
    if args.method == "infogain":
        ranking = rank_infogain(ds, args.discretizer)
    else:
        ranking = rank_relieff(ds, args.k_neighbors, _samples(args.samples), args.seed)
    if args.top is not None:
        top_k(ranking, args.top, ds.names)
    _write(args, ranking.to_text(args.top))


def cmd_combine(args):
    a = _read_set(args.a, args.top)
    b = _read_set(args.b, args.top)
    _write(args, combine(a, b, args.mode).to_text())


def cmd_train(args):
    ds = _load_data(args)
    learner = _learner(args)
    fs = resolve(args.features, _rankings(args, ds))
    model = learner.fit(project_features(ds, fs.names), args.seed)
    try:
        model.save(args.out)
    except OSError as exc:
        raise DataError(f"{args.out}: {exc.strerror or exc}") from None
    print(f"trained {learner.id} on {ds.n_rows} rows x {len(fs)} features -> {args.out}", file=sys.stderr)


def cmd_evaluate(args):
    ds = _load_data(args)
    if args.model:
        model = _load_model(args.model)
        missing = [f for f in model.features if f not in ds.names]
        if missing:
            raise DataError(f"{args.data}: lacks model features: {', '.join(missing)}")
        res = evaluate(model, project_features(ds, model.features))
        c = res.confusion
        lines = [f"model\t{args.model}", f"learner\t{model.learner}", f"rows\t{c.total}",
                 f"tp\t{c.tp}", f"tn\t{c.tn}", f"fp\t{c.fp}", f"fn\t{c.fn}", f"accuracy\t{res.accuracy!r}"]
        _write(args, "\n".join(lines) + "\n")
        return
    learner = _learner(args)
    fs = resolve(args.features, _rankings(args, ds))
    cv = cross_validate(learner, project_features(ds, fs.names), args.k, args.seed)
    report = ExperimentReport([learner], [fs], args.k, args.seed, {(learner.id, fs.provenance): list(cv.folds)})
    _write(args, render_report(report, _format(args), args.timings))


def cmd_grid(args):
    ds = _load_data(args)
    rankings = _rankings(args, ds)
    if args.suite:
        learners, sets = suite(args.suite, rankings)
    else:
        try:
            learners = [LearnerConfig(x.strip()) for x in args.learners.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        sets = [resolve(s.strip(), rankings) for s in args.feature_sets.split(",") if s.strip()]
        if not learners or not sets:
            raise UsageError("need at least one learner and one feature set")
    jobs = args.jobs if args.jobs is not None else _jobs_default()
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    try:
        report = run_grid(ds, learners, sets, args.k, args.seed, jobs)
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise UsageError(str(exc)) from None
    _write(args, render_report(report, _format(args), args.timings))


def _read_lines(path):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def cmd_classify_url(args):
    model = _load_model(args.model)
    try:
        lexical_features_for(model.features)
    except DataError as exc:
        raise DataError(f"{args.model}: {exc}") from None
    urls = _read_lines(args.inp)
    out, bad = [], 0
    for raw in urls:
        try:
            row = url_matrix_row(raw, model.features)
        except UrlError as exc:
            print(f"skipping {raw!r}: {exc}", file=sys.stderr)
            bad += 1
            continue
        labels, scores = model.predict(np.array([row]))
        verdict = model.class_names[1] if labels[0] == POSITIVE else model.class_names[0]
        out.append(f"{verdict}\t{float(scores[0]):.6f}\t{raw}")
    _write(args, "".join(x + "\n" for x in out))
    if bad:
        raise DataError(f"{bad} of {len(urls)} URLs could not be parsed")


def _instance(args, model: TrainedModel):
    if args.url is not None:
        try:
            lexical_features_for(model.features)
            return np.array(url_matrix_row(args.url, model.features)), args.url
        except DataError as exc:
            raise DataError(f"{args.model}: {exc}") from None
    if args.data is None:
        raise UsageError("explain needs --data or --url")
    ds = _load_data(args)
    missing = [f for f in model.features if f not in ds.names]
    if missing:
        raise DataError(f"{args.data}: lacks model features: {', '.join(missing)}")
    if not 1 <= args.row <= ds.n_rows:
        raise UsageError(f"--row must lie in [1, {ds.n_rows}]")
    sub = project_features(ds, model.features)
    return sub.X[args.row - 1], f"{args.data} row {args.row}"


def _explain_tree(tree, names, x):
    lines = []
    node = 0
    while tree.feature[node] >= 0:
        f, t = int(tree.feature[node]), float(tree.threshold[node])
        v = float(x[f])
        go_left = v <= t
        lines.append(f"  {names[f]} = {v!r} {'<=' if go_left else '>'} {t!r}")
        node = tree.left[node] if go_left else tree.right[node]
    neg, pos = tree.counts[node]
    lines.append(f"  leaf counts legitimate={neg:g} phishing={pos:g}")
    return lines


def cmd_explain(args):
    from .crisp import TreeModel
    from .dataset import fill_missing
    from .fuzzy import FuzzyEnsemble, FuzzyRuleBase
    from .fuzzy.rules import rule_to_text

    model = _load_model(args.model)
    x, where = _instance(args, model)
    x = fill_missing(np.atleast_2d(x), model.medians)[0]
    labels, scores = model.predict(x[None, :])
    verdict = model.class_names[1] if labels[0] == POSITIVE else model.class_names[0]
    lines = [f"instance\t{where}", f"learner\t{model.learner}", f"verdict\t{verdict}",
             f"score\t{float(scores[0]):.6f}"]
    inner = model.model
    if isinstance(inner, FuzzyRuleBase):
        fired = inner.firing(x)
        lines.append(f"firing rules\t{len(fired)} of {len(inner)}")
        for i, act in sorted(fired, key=lambda t: (-t[1], t[0])):
            lines.append(f"  [{i}] act={act:.6f} {rule_to_text(inner.rules[i], model.class_names)}")
        if not fired:
            lines.append(f"  no rule fires; fallback {inner.fallback}")
    elif isinstance(inner, FuzzyEnsemble):
        votes = inner.votes(x[None, :])[0]
        lines.append(f"stages\t{len(inner.members)}")
        for t, ((rb, alpha), v) in enumerate(zip(inner.members, votes)):
            fires = rb.activations(x[None, :])[0, 0] > 0
            lines.append(f"  [{t}] alpha={alpha:.6f} {'fires' if fires else 'silent'} "
                         f"vote={model.class_names[int(v > 0)]} {rule_to_text(rb.rules[0], model.class_names)}")
    elif isinstance(inner, TreeModel):
        lines.append("decision path")
        lines += _explain_tree(inner, model.features, x)
    else:
        lines.append("(no rule-level explanation for this learner)")
    _write(args, "\n".join(lines) + "\n")


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "select": cmd_select,
    "combine": cmd_combine,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "classify-url": cmd_classify_url,
    "explain": cmd_explain,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
