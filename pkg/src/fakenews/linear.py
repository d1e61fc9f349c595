"""Logistic regression and linear SVM trained by stochastic gradient descent.

Both minimise ``(1/n) * sum(loss_i) + (lam / 2) * ||w||^2`` over sparse
inputs; the bias is never regularised.

* ``log``:   loss = -[y ln p + (1 - y) ln(1 - p)], p = sigmoid(w.x + b)
* ``hinge``: loss = max(0, 1 - t (w.x + b)), t = +1 for real, -1 for fake

Training is epoch-wise SGD over a seeded Fisher-Yates order. Log-loss uses a
constant learning rate. Hinge uses the Pegasos step ``1 / (lam * t)`` on the
weights when ``lam > 0`` (constant rate when ``lam == 0``); its bias always
moves at the constant rate, because a 1/(lam*t) step on an unregularised
bias never forgets the first, huge, steps.

Weights are stored as ``scale * v`` during training so the L2 shrink is O(1)
per step instead of O(dim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DivergedTraining, SingleClassTraining, WrongModelKind
from .rng import Rng
from .vectorize import SparseVector, as_csr

LOSS_KINDS = ("log", "hinge")
_RESCALE_BELOW = 1e-9


@dataclass
class TrainHyper:
    learning_rate: float = 0.1
    epochs: int = 20
    lam: float = 1e-4
    seed: int = 42
    full_batch: bool = False  # plain gradient descent, used by convergence tests

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    loss_kind: str
    lam: float = 0.0

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = float(self.bias)

    @property
    def dim(self):
        return len(self.weights)

    @classmethod
    def zeros(cls, dim, loss_kind="log", lam=0.0):
        return cls(np.zeros(dim), 0.0, loss_kind, lam)


def sigmoid(s):
    """Overflow-free logistic function for scalars."""
    if s >= 0:
        return 1.0 / (1.0 + math.exp(-s))
    e = math.exp(s)
    return e / (1.0 + e)


def _check_dim(model, x):
    if x.dim != model.dim:
        raise DimensionMismatch(f"input dim {x.dim} != model dim {model.dim}")


def decision(model: LinearModel, x: SparseVector) -> float:
    """w.x + b over the stored entries of ``x``."""
    _check_dim(model, x)
    return float(np.dot(model.weights[x.indices], x.values)) + model.bias


def predict_proba(model: LinearModel, x: SparseVector) -> float:
    if model.loss_kind != "log":
        raise WrongModelKind("probabilities are only defined for log-loss models")
    return sigmoid(decision(model, x))


def labels_from_scores(model, scores):
    # Log models threshold the rounded probability: for |s| below ~1e-16 the
    # sigmoid is exactly 0.5 while s may be negative, and the probability
    # rule is the one callers can observe.
    if model.loss_kind == "log":
        return np.array([sigmoid(s) >= 0.5 for s in scores], dtype=np.int64)
    return (np.asarray(scores) >= 0.0).astype(np.int64)


def predict(model: LinearModel, x: SparseVector) -> int:
    """1 (real) iff w.x + b >= 0 (probability >= 0.5 for log models); ties count as real."""
    return int(labels_from_scores(model, [decision(model, x)])[0])


def decisions(model: LinearModel, X) -> np.ndarray:
    """Row-wise :func:`decision` for a CSR matrix or list of vectors."""
    X = as_csr(X)
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"input dim {X.shape[1]} != model dim {model.dim}")
    w, b = model.weights, model.bias
    ptr, ind, dat = X.indptr, X.indices, X.data
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        lo, hi = ptr[r], ptr[r + 1]
        out[r] = float(np.dot(w[ind[lo:hi]], dat[lo:hi])) + b
    return out


def predict_many(model: LinearModel, X) -> np.ndarray:
    return labels_from_scores(model, decisions(model, X))


# -- objective and gradient ----------------------------------------------------


def _margin_targets(y):
    return np.where(np.asarray(y) == 1, 1.0, -1.0)


def objective(w, b, X, y, loss_kind, lam):
    """Regularised training objective at (w, b)."""
    X = as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    s = X @ w + b
    if loss_kind == "log":
        # ln(1 + e^s) - y s, computed stably
        losses = np.logaddexp(0.0, s) - y * s
    else:
        losses = np.maximum(0.0, 1.0 - _margin_targets(y) * s)
    return float(losses.mean() + 0.5 * lam * np.dot(w, w))


def gradient(w, b, X, y, loss_kind, lam):
    """(grad_w, grad_b) of :func:`objective`; hinge uses the subgradient 0 at the kink."""
    X = as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    s = X @ w + b
    if loss_kind == "log":
        p = np.array([sigmoid(v) for v in s])
        r = p - y
    else:
        t = _margin_targets(y)
        r = np.where(t * s < 1.0, -t, 0.0)
    return X.T @ r / n + lam * w, float(r.sum() / n)


# -- training ------------------------------------------------------------------


def _validate(X, y):
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} inputs but {len(y)} labels")
    if len(y) < 2:
        raise SingleClassTraining("need at least two training examples")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if y.min() == y.max():
        raise SingleClassTraining(f"all training labels are {int(y[0])}")
    return X, y


def _train(X, y, hyper, loss_kind):
    X, y = _validate(X, y)
    n, dim = X.shape
    lam, lr = hyper.lam, hyper.learning_rate

    if hyper.full_batch:
        w, b = np.zeros(dim), 0.0
        for _ in range(hyper.epochs):
            gw, gb = gradient(w, b, X, y, loss_kind, lam)
            w = w - lr * gw
            b = b - lr * gb
        return _finish(w, b, loss_kind, lam)

    if loss_kind == "log" and lr * lam >= 1.0:
        raise ValueError("learning_rate * lam must be < 1 for log-loss SGD")

    pegasos = loss_kind == "hinge" and lam > 0
    v = np.zeros(dim)
    scale = 1.0
    b = 0.0
    ptr, ind, dat = X.indptr, X.indices, X.data
    targets = _margin_targets(y).tolist()
    labels = y.astype(np.float64).tolist()
    rng = Rng(hyper.seed)
    step = 0
    for _ in range(hyper.epochs):
        for i in rng.permutation(n).tolist():
            step += 1
            lo, hi = ptr[i], ptr[i + 1]
            cols, vals = ind[lo:hi], dat[lo:hi]
            s = scale * float(np.dot(v[cols], vals)) + b
            eta = 1.0 / (lam * step) if pegasos else lr

            shrink = 1.0 - eta * lam
            if shrink <= 0.0:
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink

            if loss_kind == "log":
                r = sigmoid(s) - labels[i]
                if r != 0.0:
                    v[cols] -= (eta * r / scale) * vals
                    b -= lr * r
            else:
                t = targets[i]
                if t * s < 1.0:
                    v[cols] += (eta * t / scale) * vals
                    b += lr * t

            if scale < _RESCALE_BELOW:
                v *= scale
                scale = 1.0
    return _finish(v * scale, b, loss_kind, lam)


def _finish(w, b, loss_kind, lam):
    if not (np.all(np.isfinite(w)) and math.isfinite(b)):
        raise DivergedTraining(f"{loss_kind} training produced non-finite weights")
    return LinearModel(w, b, loss_kind, lam)


def train_logreg(X, y, hyper: TrainHyper = TrainHyper()) -> LinearModel:
    """Logistic regression by seeded SGD on the regularised log-loss."""
    return _train(X, y, hyper, "log")


def train_svm(X, y, hyper: TrainHyper = TrainHyper()) -> LinearModel:
    """Linear SVM by Pegasos-style stochastic subgradient descent on the hinge loss."""
    return _train(X, y, hyper, "hinge")
