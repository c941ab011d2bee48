"""Dataset schema, CSV/ARFF ingestion, projection and stratified folds."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyFile,
    MissingClassColumn,
    RowArityMismatch,
    SchemaMismatch,
    TooFewRowsPerClass,
    UnknownFeature,
    UnknownLabel,
    UnparsableValue,
)

NEGATIVE = 0
POSITIVE = 1
DEFAULT_CLASS_COLUMN = "CLASS_LABEL"
MISSING_TOKENS = frozenset({"", "?"})
# row identifiers carry no signal and, in class-sorted files, leak the label
DEFAULT_DROP_COLUMNS = ("id",)

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[tuple[str, str], ...]
    class_attribute: str = DEFAULT_CLASS_COLUMN
    positive_label: str = "phishing"
    negative_label: str = "legitimate"

    def __post_init__(self):
        names = [n for n, _ in self.features]
        if any(not n for n in names):
            raise ValueError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        for _, kind in self.features:
            if kind not in ("numeric", "binary"):
                raise ValueError(f"unknown feature kind {kind!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.features)

    @property
    def n_features(self) -> int:
        return len(self.features)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownFeature(name) from None

    def kind(self, name: str) -> str:
        return self.features[self.index(name)][1]

    def class_name(self, label: int) -> str:
        return self.positive_label if label == POSITIVE else self.negative_label

    def subset(self, names: Sequence[str]) -> "FeatureSchema":
        kinds = dict(self.features)
        for n in names:
            if n not in kinds:
                raise UnknownFeature(n)
        return FeatureSchema(
            tuple((n, kinds[n]) for n in names),
            self.class_attribute,
            self.positive_label,
            self.negative_label,
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus binary labels (1 = positive/phishing).

    Missing cells are kept as NaN; they are imputed from training-fold
    medians when a learner is fitted, never at load time.
    """

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int8)
        if X.ndim != 2:
            X = X.reshape(len(y), -1) if X.size else np.zeros((len(y), self.schema.n_features))
        if X.shape[1] != self.schema.n_features:
            raise SchemaMismatch(
                f"matrix has {X.shape[1]} columns but schema has {self.schema.n_features} features"
            )
        if X.shape[0] != y.shape[0]:
            raise ValueError("row count and label count differ")
        if y.size and not np.isin(y, (NEGATIVE, POSITIVE)).all():
            raise ValueError("labels must be 0 (negative) or 1 (positive)")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return self.schema.names

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.y.sum())
        return self.n_rows - pos, pos

    def has_missing(self) -> bool:
        return bool(np.isnan(self.X).any())

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        if rows.dtype != bool:
            rows = rows.astype(np.intp)
        return Dataset(self.schema, self.X[rows], self.y[rows])

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.schema.index(name)]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.X.shape == other.X.shape
            and self.X.tobytes() == other.X.tobytes()
            and self.y.tobytes() == other.y.tobytes()
        )

    __hash__ = None


def _infer_kind(col: np.ndarray) -> str:
    vals = col[~np.isnan(col)]
    if vals.size and np.isin(vals, (0.0, 1.0)).all():
        return "binary"
    return "numeric"


def _parse_value(text: str, row: int, column: str) -> float:
    s = text.strip()
    if s in MISSING_TOKENS:
        return math.nan
    if not _NUMBER.match(s):
        raise UnparsableValue(row, column, text)
    return float(s)


def _parse_label(text: str, row: int, schema_pos: str, schema_neg: str) -> int:
    s = text.strip()
    low = s.lower()
    if low == schema_pos.lower():
        return POSITIVE
    if low == schema_neg.lower():
        return NEGATIVE
    if _NUMBER.match(s):
        v = float(s)
        if v == 1.0:
            return POSITIVE
        if v == 0.0:
            return NEGATIVE
    raise UnknownLabel(row, text)


def _build(header, body, class_column, schema_hint, positive_label, negative_label, drop_columns=()):
    if class_column not in header:
        raise MissingClassColumn(class_column)
    ci = header.index(class_column)
    dropped = {d.lower() for d in drop_columns} - {class_column.lower()}
    if schema_hint is not None:
        dropped -= {n.lower() for n in schema_hint.names}
    skip = {i for i, h in enumerate(header) if h.lower() in dropped}
    feat_cols = [h for i, h in enumerate(header) if i != ci and i not in skip]
    if schema_hint is not None:
        missing = [n for n in schema_hint.names if n not in feat_cols]
        if missing:
            raise UnknownFeature(missing[0])
        positive_label = schema_hint.positive_label
        negative_label = schema_hint.negative_label
    X = np.empty((len(body), len(feat_cols)))
    y = np.empty(len(body), dtype=np.int8)
    for r, (lineno, cells) in enumerate(body):
        if len(cells) != len(header):
            raise RowArityMismatch(lineno, len(header), len(cells))
        j = 0
        for i, cell in enumerate(cells):
            if i == ci:
                y[r] = _parse_label(cell, lineno, positive_label, negative_label)
            elif i not in skip:
                X[r, j] = _parse_value(cell, lineno, header[i])
                j += 1
    if schema_hint is not None:
        order = [feat_cols.index(n) for n in schema_hint.names]
        X = X[:, order]
        schema = schema_hint
    else:
        schema = FeatureSchema(
            tuple((n, _infer_kind(X[:, i])) for i, n in enumerate(feat_cols)),
            class_column,
            positive_label,
            negative_label,
        )
    return Dataset(schema, X, y)


def load_csv(
    path,
    schema_hint: FeatureSchema | None = None,
    class_column: str | None = None,
    positive_label: str = "phishing",
    negative_label: str = "legitimate",
    drop_columns: Sequence[str] = DEFAULT_DROP_COLUMNS,
) -> Dataset:
    """Read a headed, comma-separated file.

    Row numbers in errors are 1-based data rows (the header is row 0).
    Columns named in ``drop_columns`` (case-insensitive) are ignored.
    """
    if class_column is None:
        class_column = schema_hint.class_attribute if schema_hint else DEFAULT_CLASS_COLUMN
    text = Path(path).read_text(encoding="utf-8-sig")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    rows = [(i, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyFile(f"{path}: no header")
    header = [h.strip() for h in rows[0][1]]
    body = rows[1:]
    if not body:
        raise EmptyFile(f"{path}: no data rows")
    return _build(header, body, class_column, schema_hint, positive_label, negative_label, drop_columns)


def _format_number(v: float) -> str:
    if math.isnan(v):
        return "?"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.names) + [ds.schema.class_attribute])
        for row, label in zip(ds.X, ds.y):
            w.writerow([_format_number(v) for v in row] + [str(int(label))])


_ARFF_ATTR = re.compile(
    r"^@attribute\s+('(?:[^'\\]|\\.)*'|\"(?:[^\"\\]|\\.)*\"|\S+)\s+(.+)$", re.IGNORECASE
)


def _unquote(s: str) -> str:
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    return s


def load_arff(
    path,
    class_column: str | None = None,
    positive_label: str = "phishing",
    negative_label: str = "legitimate",
    drop_columns: Sequence[str] = DEFAULT_DROP_COLUMNS,
) -> Dataset:
    """Dense ARFF subset: @relation, numeric or two-valued nominal attributes, @data.

    The class attribute defaults to the last declared attribute. Nominal
    feature values map to their declaration index unless they are numeric.
    Row numbers in data errors count @data rows from 1, as for CSV; header
    errors give the file line.
    """
    lines = Path(path).read_text(encoding="utf-8-sig").splitlines()
    attrs: list[tuple[str, list[str] | None]] = []
    body = []
    in_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            if line.startswith("{"):
                raise UnparsableValue(len(body) + 1, "@data", "sparse rows are not supported")
            cells = next(csv.reader([line], quotechar="'", skipinitialspace=True))
            body.append((len(body) + 1, [_unquote(c) for c in cells]))
            continue
        low = line.lower()
        if low.startswith("@relation"):
            continue
        if low.startswith("@data"):
            in_data = True
            continue
        m = _ARFF_ATTR.match(line)
        if not m:
            raise UnparsableValue(lineno, "header", line)
        name, kind = _unquote(m.group(1)), m.group(2).strip()
        if kind.startswith("{"):
            values = [_unquote(v) for v in kind.strip("{}").split(",")]
            attrs.append((name, values))
        elif kind.lower() in ("numeric", "real", "integer"):
            attrs.append((name, None))
        else:
            raise UnparsableValue(lineno, name, kind)
    if not attrs:
        raise EmptyFile(f"{path}: no attributes")
    header = [a for a, _ in attrs]
    if class_column is None:
        class_column = header[-1]
    nominal = {a: vals for a, vals in attrs if vals is not None}
    fixed = []
    for row, cells in body:
        if len(cells) != len(header):
            raise RowArityMismatch(row, len(header), len(cells))
        out = []
        for name, cell in zip(header, cells):
            vals = nominal.get(name)
            if vals is not None and name != class_column and cell not in MISSING_TOKENS:
                if not _NUMBER.match(cell.strip()):
                    if cell not in vals:
                        raise UnparsableValue(row, name, cell)
                    cell = str(vals.index(cell))
            out.append(cell)
        fixed.append((row, out))
    if not fixed:
        raise EmptyFile(f"{path}: no data rows")
    return _build(header, fixed, class_column, None, positive_label, negative_label, drop_columns)


def load(path, **kw) -> Dataset:
    if str(path).lower().endswith(".arff"):
        return load_arff(path, **kw)
    return load_csv(path, **kw)


def project_features(ds: Dataset, keep: Iterable[str]) -> Dataset:
    """Columns reordered to ``keep`` (a FeatureSet or a sequence of names)."""
    names = list(getattr(keep, "names", keep))
    schema = ds.schema.subset(names)
    idx = [ds.schema.index(n) for n in names]
    return Dataset(schema, ds.X[:, idx], ds.y)


def column_medians(X: np.ndarray) -> np.ndarray:
    """Per-column median ignoring NaN; all-missing columns get 0."""
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        col = col[~np.isnan(col)]
        if col.size:
            out[j] = float(np.median(col))
    return out


def fill_missing(X: np.ndarray, medians: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    mask = np.isnan(X)
    if not mask.any():
        return X
    X = X.copy()
    X[mask] = np.broadcast_to(medians, X.shape)[mask]
    return X


def impute(ds: Dataset, medians: np.ndarray | None = None) -> tuple[Dataset, np.ndarray]:
    if medians is None:
        medians = column_medians(ds.X)
    return Dataset(ds.schema, fill_missing(ds.X, medians), ds.y), medians


_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 generator; used to derive child seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *stream: int) -> int:
    s = seed & _MASK64
    for k in stream:
        s = splitmix64(s ^ (k & _MASK64))
    return s


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & _MASK64)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "assignments", _frozen(np.asarray(self.assignments, dtype=np.int64)))

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def fold_sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


def stratified_kfold(ds: Dataset, k: int, seed: int = 42) -> FoldPlan:
    """Shuffle each class with a seeded generator and deal rows round-robin.

    The dealing position carries over from one class to the next so total
    fold sizes stay within one row of each other as well.
    """
    if k < 2:
        raise TooFewRowsPerClass(f"k must be at least 2, got {k}")
    rng = rng_for(seed)
    assignments = np.empty(ds.n_rows, dtype=np.int64)
    offset = 0
    for label in (NEGATIVE, POSITIVE):
        rows = np.flatnonzero(ds.y == label)
        if rows.size < k:
            name = ds.schema.class_name(label)
            raise TooFewRowsPerClass(f"class {name!r} has {rows.size} rows, fewer than k={k}")
        rows = rng.permutation(rows)
        assignments[rows] = (np.arange(rows.size) + offset) % k
        offset = (offset + rows.size) % k
    return FoldPlan(k, seed, assignments)
