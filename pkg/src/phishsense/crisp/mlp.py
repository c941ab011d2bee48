"""One-hidden-layer sigmoid perceptron trained by online backpropagation
with momentum on squared error."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..dataset import Dataset, rng_for
from ..errors import ArityMismatch, EmptyDataset


@njit(cache=True)
def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@njit(cache=True)
def _row_grad(W1, b1, W2, b2, x, t, gW1, gb1, gW2, gb2):
    """Add one row's gradient of 0.5*||t - o||^2 into g*; return the row loss."""
    n_hid = W1.shape[0]
    n_out = W2.shape[0]
    h = np.empty(n_hid)
    for j in range(n_hid):
        z = b1[j]
        for i in range(x.shape[0]):
            z += W1[j, i] * x[i]
        h[j] = _sigmoid(z)
    d_out = np.empty(n_out)
    loss = 0.0
    for k in range(n_out):
        z = b2[k]
        for j in range(n_hid):
            z += W2[k, j] * h[j]
        o = _sigmoid(z)
        err = o - t[k]
        loss += 0.5 * err * err
        d_out[k] = err * o * (1.0 - o)
    for j in range(n_hid):
        back = 0.0
        for k in range(n_out):
            back += W2[k, j] * d_out[k]
            gW2[k, j] += d_out[k] * h[j]
        d_h = back * h[j] * (1.0 - h[j])
        gb1[j] += d_h
        for i in range(x.shape[0]):
            gW1[j, i] += d_h * x[i]
    for k in range(n_out):
        gb2[k] += d_out[k]
    return loss


@njit(cache=True)
def _epoch(W1, b1, W2, b2, vW1, vb1, vW2, vb2, X, T, order, lr, momentum):
    gW1 = np.zeros_like(W1)
    gb1 = np.zeros_like(b1)
    gW2 = np.zeros_like(W2)
    gb2 = np.zeros_like(b2)
    for r in order:
        gW1[:] = 0.0
        gb1[:] = 0.0
        gW2[:] = 0.0
        gb2[:] = 0.0
        _row_grad(W1, b1, W2, b2, X[r], T[r], gW1, gb1, gW2, gb2)
        vW1[:] = momentum * vW1 - lr * gW1
        vb1[:] = momentum * vb1 - lr * gb1
        vW2[:] = momentum * vW2 - lr * gW2
        vb2[:] = momentum * vb2 - lr * gb2
        W1 += vW1
        b1 += vb1
        W2 += vW2
        b2 += vb2


@njit(cache=True)
def _batch(W1, b1, W2, b2, X, T, gW1, gb1, gW2, gb2):
    loss = 0.0
    for r in range(X.shape[0]):
        loss += _row_grad(W1, b1, W2, b2, X[r], T[r], gW1, gb1, gW2, gb2)
    return loss


def one_hot(y, n_out: int = 2) -> np.ndarray:
    T = np.zeros((len(y), n_out))
    T[np.arange(len(y)), np.asarray(y, dtype=np.int64)] = 1.0
    return T


class MlpModel:
    kind = "mlp"

    def __init__(self, W1, b1, W2, b2, x_min, x_max):
        self.W1 = np.ascontiguousarray(W1, dtype=np.float64)
        self.b1 = np.ascontiguousarray(b1, dtype=np.float64)
        self.W2 = np.ascontiguousarray(W2, dtype=np.float64)
        self.b2 = np.ascontiguousarray(b2, dtype=np.float64)
        self.x_min = np.asarray(x_min, dtype=np.float64)
        self.x_max = np.asarray(x_max, dtype=np.float64)
        n_hid, n_in = self.W1.shape
        if self.b1.shape != (n_hid,) or self.W2.shape[1] != n_hid or self.b2.shape != (self.W2.shape[0],):
            raise ValueError("inconsistent layer shapes")
        if self.x_min.shape != (n_in,) or self.x_max.shape != (n_in,):
            raise ValueError("normalisation parameters must cover every input")
        self.loss_history: list[float] = []

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return self.W1.shape[1], self.W1.shape[0], self.W2.shape[0]

    @property
    def n_features(self) -> int:
        return self.W1.shape[1]

    def normalize(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        span = self.x_max - self.x_min
        return np.where(span > 0, (X - self.x_min) / np.where(span > 0, span, 1.0), 0.0)

    def forward(self, Xn) -> np.ndarray:
        H = 1.0 / (1.0 + np.exp(-(Xn @ self.W1.T + self.b1)))
        return 1.0 / (1.0 + np.exp(-(H @ self.W2.T + self.b2)))

    def outputs(self, X) -> np.ndarray:
        return self.forward(self.normalize(X))

    def predict(self, X):
        out = self.outputs(X)
        labels = np.argmax(out, axis=1).astype(np.int8)
        return labels, out[np.arange(len(out)), labels]

    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def loss(self, Xn, y) -> float:
        """Summed squared error on already-normalised inputs."""
        return 0.5 * float(((self.forward(Xn) - one_hot(y, self.W2.shape[0])) ** 2).sum())

    def gradient(self, Xn, y):
        """Analytic gradient of ``loss`` as arrays shaped like ``params()``."""
        g = [np.zeros_like(p) for p in self.params()]
        _batch(self.W1, self.b1, self.W2, self.b2, np.ascontiguousarray(Xn, dtype=np.float64),
               one_hot(y, self.W2.shape[0]), *g)
        return g


def auto_hidden(n_features: int) -> int:
    return int(math.ceil((n_features + 2) / 2))


def init_model(n_in: int, n_hidden: int, x_min, x_max, seed: int, n_out: int = 2) -> MlpModel:
    rng = rng_for(seed)
    W1 = rng.uniform(-0.5, 0.5, size=(n_hidden, n_in))
    b1 = rng.uniform(-0.5, 0.5, size=n_hidden)
    W2 = rng.uniform(-0.5, 0.5, size=(n_out, n_hidden))
    b2 = rng.uniform(-0.5, 0.5, size=n_out)
    return MlpModel(W1, b1, W2, b2, x_min, x_max)


def mlp_train(
    ds: Dataset,
    hidden: int | str = "auto",
    lr: float = 0.3,
    momentum: float = 0.2,
    epochs: int = 500,
    seed: int = 42,
    track_loss: bool = False,
) -> MlpModel:
    """Rows are visited in a fresh seeded order every epoch."""
    if ds.n_rows == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    if not lr > 0:
        raise ValueError("lr must be positive")
    n_hidden = auto_hidden(ds.n_features) if hidden in ("auto", None) else int(hidden)
    X = ds.X
    model = init_model(ds.n_features, n_hidden, X.min(axis=0), X.max(axis=0), seed)
    Xn = np.ascontiguousarray(model.normalize(X))
    T = one_hot(ds.y)
    vel = [np.zeros_like(p) for p in model.params()]
    order_rng = rng_for(seed ^ 0x5DEECE66D)
    for _ in range(epochs):
        order = order_rng.permutation(ds.n_rows)
        _epoch(*model.params(), *vel, Xn, T, order, float(lr), float(momentum))
        if track_loss:
            model.loss_history.append(model.loss(Xn, ds.y))
    return model
