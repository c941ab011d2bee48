"""Weighted fuzzy IF-THEN rules, rule bases, boosted ensembles and inference."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..dataset import NEGATIVE, POSITIVE
from ..errors import ArityMismatch, ModelFormatError
from .partition import FuzzyPartition, Trapezoid

Term = Union[int, Trapezoid]

INFERENCE_MODES = ("single_winner", "additive_vote")
FALLBACKS = ("majority_class", "rule_stretching")
FORMAT_VERSION = 1
ROW_CHUNK = 512


@dataclass(frozen=True)
class FuzzyRule:
    """Conjunction of (feature, term) antecedents voting for one class.

    ``stretch`` optionally holds the certainty of every antecedent prefix
    (index L = first L antecedents kept) for rule stretching.
    """

    antecedents: tuple[tuple[str, Term], ...]
    consequent: int
    weight: float
    stretch: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(self.antecedents))
        feats = [f for f, _ in self.antecedents]
        if len(set(feats)) != len(feats):
            raise ValueError("a rule may hold at most one antecedent per feature")
        if not self.weight > 0:
            raise ValueError("rule weight must be positive")
        if self.stretch is not None:
            object.__setattr__(self, "stretch", tuple(float(s) for s in self.stretch))
            if len(self.stretch) != len(self.antecedents) + 1:
                raise ValueError("stretch needs one certainty per antecedent prefix")

    @property
    def key(self):
        return tuple((f, t) for f, t in self.antecedents)


def _majority(y) -> int:
    y = np.asarray(y)
    pos = int((y == POSITIVE).sum())
    return POSITIVE if pos > y.size - pos else NEGATIVE


class FuzzyRuleBase:
    """Rules over a fixed feature order plus an inference policy.

    ``predict`` returns (labels, scores): the class chosen per row and the
    winning rule value (single winner) or class vote (additive).
    """

    def __init__(
        self,
        features: Sequence[str],
        rules: Sequence[FuzzyRule],
        partitions: dict[str, FuzzyPartition] | None = None,
        inference: str = "single_winner",
        fallback: str = "majority_class",
        default_class: int = NEGATIVE,
        class_names: tuple[str, str] = ("legitimate", "phishing"),
        name: str = "rulebase",
    ):
        if inference not in INFERENCE_MODES:
            raise ValueError(f"unknown inference {inference!r}")
        if fallback not in FALLBACKS:
            raise ValueError(f"unknown fallback {fallback!r}")
        self.features = tuple(features)
        self.rules = tuple(rules)
        self.partitions = dict(partitions) if partitions else None
        self.inference = inference
        self.fallback = fallback
        self.default_class = int(default_class)
        self.class_names = tuple(class_names)
        self.name = name
        self._index = {f: i for i, f in enumerate(self.features)}
        self._compile()

    def _compile(self):
        label_terms: dict[int, tuple[list[int], list[int]]] = {}
        trap_terms: dict[int, list[tuple[int, Trapezoid]]] = {}
        for r, rule in enumerate(self.rules):
            for feat, term in rule.antecedents:
                if feat not in self._index:
                    raise ArityMismatch(f"rule uses feature {feat!r} outside the rule-base schema")
                j = self._index[feat]
                if isinstance(term, Trapezoid):
                    trap_terms.setdefault(j, []).append((r, term))
                else:
                    if self.partitions is None or feat not in self.partitions:
                        raise ValueError(f"label term on {feat!r} without a partition")
                    if not 0 <= term < self.partitions[feat].n_labels:
                        raise ValueError(f"label {term} out of range for {feat!r}")
                    rs, ls = label_terms.setdefault(j, ([], []))
                    rs.append(r)
                    ls.append(int(term))
        self._label_terms = {j: (np.array(rs), np.array(ls)) for j, (rs, ls) in label_terms.items()}
        self._trap_terms = trap_terms
        self._weights = np.array([r.weight for r in self.rules], dtype=np.float64)
        self._classes = np.array([r.consequent for r in self.rules], dtype=np.int64)

    def __len__(self):
        return len(self.rules)

    def _check(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.features):
            raise ArityMismatch(f"expected {len(self.features)} features, got {X.shape[1]}")
        return X

    def term_membership(self, feature: str, term: Term, x) -> np.ndarray:
        if isinstance(term, Trapezoid):
            return term(x)
        return self.partitions[feature].memberships(x)[:, term]

    def activations(self, X) -> np.ndarray:
        """Product t-norm firing degree, shape (n_rows, n_rules)."""
        X = self._check(X)
        out = np.ones((X.shape[0], len(self.rules)))
        for j, (rs, ls) in self._label_terms.items():
            m = self.partitions[self.features[j]].memberships(X[:, j])
            out[:, rs] *= m[:, ls]
        for j, terms in self._trap_terms.items():
            for r, trap in terms:
                out[:, r] *= trap(X[:, j])
        return out

    def _decide(self, A: np.ndarray):
        n = A.shape[0]
        labels = np.full(n, -1, dtype=np.int8)
        scores = np.zeros(n)
        if not self.rules:
            return labels, scores
        V = A * self._weights
        per_class = np.zeros((n, 2))
        for c in (NEGATIVE, POSITIVE):
            cols = self._classes == c
            if cols.any():
                per_class[:, c] = V[:, cols].max(axis=1) if self.inference == "single_winner" else V[:, cols].sum(axis=1)
        fired = per_class.max(axis=1) > 0
        win = np.where(per_class[:, POSITIVE] > per_class[:, NEGATIVE], POSITIVE, NEGATIVE)
        labels[fired] = win[fired]
        scores[fired] = per_class[fired, win[fired]]
        return labels, scores

    def _stretch(self, X: np.ndarray):
        n = X.shape[0]
        best = np.full((n, 2), -1.0)
        for rule in self.rules:
            cp = np.ones((n, len(rule.antecedents) + 1))
            for i, (feat, term) in enumerate(rule.antecedents):
                cp[:, i + 1] = cp[:, i] * self.term_membership(feat, term, X[:, self._index[feat]])
            kept = (cp > 0).sum(axis=1) - 1
            act = cp[np.arange(n), kept]
            cert = np.asarray(rule.stretch if rule.stretch is not None else [rule.weight] * cp.shape[1])
            s = cert[kept] * act
            c = rule.consequent
            best[:, c] = np.maximum(best[:, c], s)
        labels = np.where(best[:, POSITIVE] > best[:, NEGATIVE], POSITIVE, NEGATIVE).astype(np.int8)
        scores = best[np.arange(n), labels]
        none = best.max(axis=1) < 0
        labels[none] = self.default_class
        scores[none] = 0.0
        return labels, scores

    def predict(self, X):
        X = self._check(X)
        labels = np.empty(X.shape[0], dtype=np.int8)
        scores = np.empty(X.shape[0])
        for start in range(0, X.shape[0], ROW_CHUNK):
            chunk = X[start : start + ROW_CHUNK]
            lab, sc = self._decide(self.activations(chunk))
            miss = lab < 0
            if miss.any():
                if self.fallback == "rule_stretching" and self.rules:
                    lab[miss], sc[miss] = self._stretch(chunk[miss])
                else:
                    lab[miss] = self.default_class
                    sc[miss] = 0.0
            labels[start : start + len(chunk)] = lab
            scores[start : start + len(chunk)] = sc
        return labels, scores

    def firing(self, x) -> list[tuple[int, float]]:
        """(rule index, activation) for every rule firing on one instance."""
        a = self.activations(np.atleast_2d(x))[0]
        return [(i, float(a[i])) for i in np.flatnonzero(a > 0)]

    def to_text(self) -> str:
        return dumps(self)


def fuzzy_classify(rb, x) -> tuple[int, float]:
    """Classify a single feature vector with a rule base or ensemble."""
    labels, scores = rb.predict(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    return int(labels[0]), float(scores[0])


@dataclass
class FuzzyEnsemble:
    """Boosted single-rule members; a member that does not fire votes
    for the class opposite its consequent."""

    features: tuple[str, ...]
    members: list[tuple[FuzzyRuleBase, float]]
    default_class: int = NEGATIVE
    partitions: dict[str, FuzzyPartition] | None = None
    class_names: tuple[str, str] = ("legitimate", "phishing")
    name: str = field(default="ensemble")

    def __post_init__(self):
        self.features = tuple(self.features)
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        for _, alpha in self.members:
            if not math.isfinite(alpha):
                raise ValueError("stage weights must be finite")

    def votes(self, X) -> np.ndarray:
        """Per-stage ±1 votes (+1 = positive), shape (n_rows, n_members)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.features):
            raise ArityMismatch(f"expected {len(self.features)} features, got {X.shape[1]}")
        out = np.empty((X.shape[0], len(self.members)))
        for t, (rb, _) in enumerate(self.members):
            rule = rb.rules[0]
            fires = rb.activations(X)[:, 0] > 0
            pred = np.where(fires, rule.consequent, 1 - rule.consequent)
            out[:, t] = np.where(pred == POSITIVE, 1.0, -1.0)
        return out

    def margin(self, X) -> np.ndarray:
        alphas = np.array([a for _, a in self.members])
        return self.votes(X) @ alphas

    def predict(self, X):
        alphas = np.array([a for _, a in self.members])
        f = self.margin(X)
        labels = np.where(f > 0, POSITIVE, np.where(f < 0, NEGATIVE, self.default_class)).astype(np.int8)
        total = alphas.sum()
        if total > 0:
            scores = 0.5 + np.where(labels == POSITIVE, f, -f) / (2 * total)
        else:
            scores = np.zeros(len(f))
        return labels, scores

    def to_text(self) -> str:
        return dumps(self)


# ---------------------------------------------------------------- text format

_NAME = re.compile(r"^[^\s,\[\]=]+$")


def _check_name(name: str):
    if not _NAME.match(name) or name.upper() in ("IF", "AND", "THEN", "TRUE"):
        raise ValueError(f"feature name {name!r} cannot be written in the rule format")


def _fmt(v: float) -> str:
    return repr(float(v))


def _term_text(feature: str, term: Term) -> str:
    if isinstance(term, Trapezoid):
        vals = ",".join(_fmt(v) for v in (term.support_lo, term.core_lo, term.core_hi, term.support_hi))
        return f"{feature} in [{vals}]"
    return f"{feature} is L{int(term)}"


def rule_to_text(rule: FuzzyRule, class_names=("legitimate", "phishing")) -> str:
    ante = " AND ".join(_term_text(f, t) for f, t in rule.antecedents) or "TRUE"
    line = f"IF {ante} THEN {class_names[rule.consequent]} CF={_fmt(rule.weight)}"
    if rule.stretch is not None:
        line += " STRETCH=" + ",".join(_fmt(s) for s in rule.stretch)
    return line


_RULE = re.compile(r"^IF (?P<ante>.+) THEN (?P<cls>\S+) CF=(?P<cf>\S+)(?: STRETCH=(?P<st>\S+))?$")
_LABEL_TERM = re.compile(r"^(?P<f>\S+) is L(?P<l>\d+)$")
_TRAP_TERM = re.compile(r"^(?P<f>\S+) in \[(?P<v>[^\]]+)\]$")


def rule_from_text(line: str, class_names=("legitimate", "phishing")) -> FuzzyRule:
    m = _RULE.match(line.strip())
    if not m:
        raise ModelFormatError(f"not a rule: {line!r}")
    ante = []
    if m.group("ante") != "TRUE":
        for part in m.group("ante").split(" AND "):
            lm = _LABEL_TERM.match(part)
            tm = _TRAP_TERM.match(part)
            if lm:
                ante.append((lm.group("f"), int(lm.group("l"))))
            elif tm:
                vals = [float(v) for v in tm.group("v").split(",")]
                if len(vals) != 4:
                    raise ModelFormatError(f"trapezoid needs four values: {part!r}")
                ante.append((tm.group("f"), Trapezoid(*vals)))
            else:
                raise ModelFormatError(f"bad antecedent {part!r}")
    cls = m.group("cls")
    if cls not in class_names:
        raise ModelFormatError(f"unknown class {cls!r}")
    stretch = None
    if m.group("st"):
        stretch = tuple(float(v) for v in m.group("st").split(","))
    try:
        return FuzzyRule(tuple(ante), class_names.index(cls), float(m.group("cf")), stretch)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def dumps(model) -> str:
    for f in model.features:
        _check_name(f)
    for c in model.class_names:
        _check_name(c)
    kind = "ensemble" if isinstance(model, FuzzyEnsemble) else "rulebase"
    lines = [
        f"fuzzy-format: {FORMAT_VERSION}",
        f"kind: {kind}",
        f"name: {model.name}",
        "classes: " + ",".join(model.class_names),
        "features: " + ",".join(model.features),
        f"default: {model.class_names[model.default_class]}",
    ]
    if kind == "rulebase":
        lines.append(f"inference: {model.inference}")
        lines.append(f"fallback: {model.fallback}")
    for p in (model.partitions or {}).values():
        lines.append(f"PARTITION {p.feature} {_fmt(p.lo)} {_fmt(p.hi)} {p.n_labels}")
    if kind == "rulebase":
        lines.extend(rule_to_text(r, model.class_names) for r in model.rules)
    else:
        for rb, alpha in model.members:
            lines.append(f"ALPHA={_fmt(alpha)} " + rule_to_text(rb.rules[0], model.class_names))
    return "\n".join(lines) + "\n"


def loads(text: str):
    """Parse ``dumps`` output; any malformed input raises ModelFormatError."""
    try:
        return _loads(text)
    except ModelFormatError:
        raise
    except (KeyError, ValueError, IndexError, ArityMismatch) as exc:
        raise ModelFormatError(f"malformed fuzzy model: {exc}") from None


def _loads(text: str):
    header: dict[str, str] = {}
    partitions: dict[str, FuzzyPartition] = {}
    rules: list[FuzzyRule] = []
    alphas: list[float] = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("fuzzy-format:"):
        raise ModelFormatError("missing 'fuzzy-format' header")
    for ln in lines:
        if ln.startswith("PARTITION "):
            parts = ln.split()
            if len(parts) != 5:
                raise ModelFormatError(f"bad partition line {ln!r}")
            partitions[parts[1]] = FuzzyPartition(parts[1], float(parts[2]), float(parts[3]), int(parts[4]))
        elif ln.startswith("ALPHA="):
            head, _, rest = ln.partition(" ")
            alphas.append(float(head[len("ALPHA="):]))
            rules.append(rule_from_text(rest, tuple(header["classes"].split(","))))
        elif ln.startswith("IF "):
            rules.append(rule_from_text(ln, tuple(header["classes"].split(","))))
        else:
            key, sep, value = ln.partition(":")
            if not sep:
                raise ModelFormatError(f"unrecognised line {ln!r}")
            header[key.strip()] = value.strip()
    try:
        version = int(header["fuzzy-format"])
        class_names = tuple(header["classes"].split(","))
        features = tuple(f for f in header["features"].split(",") if f)
        default = class_names.index(header["default"])
        kind = header["kind"]
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"incomplete fuzzy model header: {exc}") from None
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported fuzzy-format {version}")
    parts = partitions or None
    if kind == "rulebase":
        return FuzzyRuleBase(
            features, rules, parts, header.get("inference", "single_winner"),
            header.get("fallback", "majority_class"), default, class_names, header.get("name", "rulebase"),
        )
    if kind == "ensemble":
        members = [
            (FuzzyRuleBase(features, [r], parts, "single_winner", "majority_class", default, class_names), a)
            for r, a in zip(rules, alphas)
        ]
        return FuzzyEnsemble(features, members, default, parts, class_names, header.get("name", "ensemble"))
    raise ModelFormatError(f"unknown fuzzy model kind {kind!r}")
