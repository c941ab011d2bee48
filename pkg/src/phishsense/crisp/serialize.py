"""Versioned text dumps of crisp models (``model-format: 1``)."""

from __future__ import annotations

import numpy as np

from ..errors import ModelFormatError
from .forest import ForestModel
from .mlp import MlpModel
from .tree import TreeModel

FORMAT_VERSION = 1


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dumps(model) -> str:
    lines = [f"model-format: {FORMAT_VERSION}", f"kind: {model.kind}"]
    if isinstance(model, TreeModel):
        lines.append(f"n_features: {model.n_features}")
        lines.extend(model.to_lines())
    elif isinstance(model, ForestModel):
        lines += [
            f"n_features: {model.n_features}",
            f"k_features: {model.k_features}",
            f"seed: {model.seed}",
            f"trees: {len(model.trees)}",
        ]
        for tree, s in zip(model.trees, model.tree_seeds):
            lines.append(f"TREE {s}")
            lines.extend(tree.to_lines())
    elif isinstance(model, MlpModel):
        n_in, n_hid, n_out = model.layer_sizes
        lines.append(f"dims: {n_in} {n_hid} {n_out}")
        lines.append("min: " + _floats(model.x_min))
        lines.append("max: " + _floats(model.x_max))
        lines.append("W1: " + _floats(model.W1))
        lines.append("b1: " + _floats(model.b1))
        lines.append("W2: " + _floats(model.W2))
        lines.append("b2: " + _floats(model.b2))
    else:
        raise TypeError(f"not a crisp model: {type(model).__name__}")
    return "\n".join(lines) + "\n"


def _header(lines, key):
    for ln in lines:
        if ln.startswith(key + ":"):
            return ln.split(":", 1)[1].strip()
    raise ModelFormatError(f"missing {key!r}")


def _vector(lines, key, size):
    vals = np.array([float(v) for v in _header(lines, key).split()])
    if vals.size != size:
        raise ModelFormatError(f"{key}: expected {size} values, got {vals.size}")
    return vals


def loads(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    try:
        version = int(_header(lines, "model-format"))
        kind = _header(lines, "kind")
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model-format {version}")
        if kind == "tree":
            n = int(_header(lines, "n_features"))
            body = [ln for ln in lines if ln[:2] in ("N ", "L ")]
            tree, used = TreeModel.from_lines(body, n)
            if used != len(body):
                raise ModelFormatError("trailing tree lines")
            return tree
        if kind == "forest":
            n = int(_header(lines, "n_features"))
            k = int(_header(lines, "k_features"))
            seed = int(_header(lines, "seed"))
            count = int(_header(lines, "trees"))
            trees, seeds = [], []
            i = next(j for j, ln in enumerate(lines) if ln.startswith("TREE "))
            while i < len(lines):
                seeds.append(int(lines[i].split()[1]))
                tree, used = TreeModel.from_lines(lines[i + 1:], n)
                trees.append(tree)
                i += 1 + used
            if len(trees) != count:
                raise ModelFormatError(f"expected {count} trees, found {len(trees)}")
            return ForestModel(trees, k, seed, seeds)
        if kind == "mlp":
            n_in, n_hid, n_out = (int(v) for v in _header(lines, "dims").split())
            return MlpModel(
                _vector(lines, "W1", n_hid * n_in).reshape(n_hid, n_in),
                _vector(lines, "b1", n_hid),
                _vector(lines, "W2", n_out * n_hid).reshape(n_out, n_hid),
                _vector(lines, "b2", n_out),
                _vector(lines, "min", n_in),
                _vector(lines, "max", n_in),
            )
    except ModelFormatError:
        raise
    except (ValueError, IndexError, StopIteration) as exc:
        raise ModelFormatError(f"malformed crisp model: {exc}") from None
    raise ModelFormatError(f"unknown model kind {kind!r}")
