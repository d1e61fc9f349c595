"""Feed-forward network (ReLU hidden layers, sigmoid output) for sparse input.

Training minimises mean binary cross-entropy plus ``(lam / 2) * sum ||W||^2``
(biases unregularised) over seeded mini-batches, with Adam by default or
plain SGD. Train-mode forwards apply inverted dropout after every hidden
ReLU: units are kept with probability ``1 - p`` and kept units are scaled by
``1 / (1 - p)``, so inference needs no correction.

Weights are stored as ``W[l]`` of shape (fan_in, fan_out). Only the first
layer sees the sparse input; deeper layers are dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, DivergedTraining, SingleClassTraining, StaleCache
from .rng import Rng
from .vectorize import SparseVector, as_csr

PROB_CLIP = 1e-12
_RESCALE_BELOW = 1e-9


@dataclass
class MlpHyper:
    hidden_dims: tuple = (128,)
    learning_rate: float = 1e-3
    epochs: int = 5
    batch_size: int = 64
    dropout_rate: float = 0.0
    lam: float = 0.0
    seed: int = 42
    optimizer: str = "adam"

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden layer sizes must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


BASELINE = MlpHyper()
REGULARIZED = MlpHyper(dropout_rate=0.5, lam=1e-4)


@dataclass
class MlpModel:
    weights: list
    biases: list
    dropout_rate: float = 0.0
    lam: float = 0.0
    history: list = field(default_factory=list, repr=False, compare=False)
    version: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: bad weight/bias shapes {w.shape}, {b.shape}")
            if l and w.shape[0] != self.weights[l - 1].shape[1]:
                raise ValueError(f"layer {l}: fan-in does not match previous layer")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("output layer must have one unit")

    @property
    def layer_dims(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def dim(self):
        return self.weights[0].shape[0]

    @classmethod
    def zeros(cls, layer_dims, dropout_rate=0.0, lam=0.0):
        ws = [np.zeros((a, b)) for a, b in zip(layer_dims[:-1], layer_dims[1:])]
        bs = [np.zeros(b) for b in layer_dims[1:]]
        return cls(ws, bs, dropout_rate, lam)

    def sq_weight_norm(self):
        return float(sum(np.sum(w * w) for w in self.weights))


def init_model(layer_dims, rng: Rng, dropout_rate=0.0, lam=0.0) -> MlpModel:
    """Glorot-uniform weights (row-major draws, layer by layer), zero biases."""
    ws, bs = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        u = rng.random(fan_in * fan_out).reshape(fan_in, fan_out)
        ws.append((2.0 * u - 1.0) * limit)
        bs.append(np.zeros(fan_out))
    return MlpModel(ws, bs, dropout_rate, lam)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass
class Cache:
    """Activations of one forward pass, consumed by :func:`backward`."""

    X: sp.csr_matrix
    acts: list          # post-dropout activations feeding each layer after the first
    pre: list           # pre-activations of every layer (last is the output logit)
    masks: list         # scaled dropout masks per hidden layer (None in infer mode)
    prob: np.ndarray
    model_id: int
    version: int


def _forward(ws, bs, scale0, X, keep, rng):
    """Forward pass with first-layer weights ``scale0 * ws[0]``."""
    pre, acts, masks = [], [], []
    z = (X @ ws[0]) * scale0 + bs[0] if scale0 != 1.0 else X @ ws[0] + bs[0]
    z = np.asarray(z)
    for l in range(1, len(ws)):
        pre.append(z)
        h = np.maximum(z, 0.0)
        if rng is not None and keep < 1.0:
            mask = (rng.random(h.size).reshape(h.shape) < keep) / keep
            h = h * mask
            masks.append(mask)
        else:
            masks.append(None)
        acts.append(h)
        z = h @ ws[l] + bs[l]
    pre.append(z)
    return _sigmoid(z[:, 0]), pre, acts, masks


def forward_many(model: MlpModel, X, mode="infer", rng=None):
    """Batched forward. ``mode='train'`` with ``rng`` applies dropout."""
    X = as_csr(X)
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"input dim {X.shape[1]} != model dim {model.dim}")
    if mode not in ("train", "infer"):
        raise ValueError("mode must be 'train' or 'infer'")
    train = mode == "train" and model.dropout_rate > 0.0
    if train and rng is None:
        raise ValueError("train-mode dropout needs an rng")
    prob, pre, acts, masks = _forward(
        model.weights, model.biases, 1.0, X, 1.0 - model.dropout_rate, rng if train else None
    )
    return prob, Cache(X, acts, pre, masks, prob, id(model), model.version)


def forward(model: MlpModel, x: SparseVector, mode="infer", rng=None):
    """(output probability, cache) for one input."""
    prob, cache = forward_many(model, [x], mode, rng)
    return float(prob[0]), cache


def _backward(ws, cache, y):
    """Data-term gradients of the mean log-loss.

    First-layer gradient is returned only for the feature rows present in
    the batch, as (rows, grad_rows).
    """
    n = cache.prob.shape[0]
    delta = ((cache.prob - y) / n)[:, None]
    dws, dbs = [None] * len(ws), [None] * len(ws)
    for l in range(len(ws) - 1, 0, -1):
        h = cache.acts[l - 1]
        dws[l] = h.T @ delta
        dbs[l] = delta.sum(axis=0)
        dh = delta @ ws[l].T
        if cache.masks[l - 1] is not None:
            dh = dh * cache.masks[l - 1]
        delta = dh * (cache.pre[l - 1] > 0.0)
    dbs[0] = delta.sum(axis=0)
    X = cache.X
    rows = np.unique(X.indices)
    sub = X[:, rows]
    dws[0] = (rows, np.asarray(sub.T @ delta))
    return dws, dbs


def backward(model: MlpModel, cache: Cache, y):
    """Gradients of mean log-loss + (lam/2) sum ||W||^2 for every parameter.

    Returns (weight_grads, bias_grads) as dense arrays shaped like the model.
    """
    if cache.model_id != id(model) or cache.version != model.version:
        raise StaleCache("cache was produced by a different model state")
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != cache.prob.shape[0]:
        raise DimensionMismatch("label count does not match cached batch")
    dws, dbs = _backward(model.weights, cache, y)
    rows, g = dws[0]
    full = np.zeros_like(model.weights[0])
    full[rows] = g
    dws[0] = full
    dws = [dw + model.lam * w for dw, w in zip(dws, model.weights)]
    return dws, dbs


def loss(model: MlpModel, X, y, mode="infer", rng=None):
    """Mean clipped cross-entropy plus the L2 penalty."""
    prob, _ = forward_many(model, X, mode, rng)
    return _objective(prob, np.asarray(y, dtype=np.float64), model.sq_weight_norm(), model.lam)


def _objective(prob, y, sq_norm, lam):
    p = np.clip(prob, PROB_CLIP, 1.0 - PROB_CLIP)
    ce = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(ce.mean() + 0.5 * lam * sq_norm)


def _check_xy(X, y):
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} inputs but {len(y)} labels")
    if len(y) < 2:
        raise SingleClassTraining("need at least two training examples")
    if y.min() == y.max():
        raise SingleClassTraining(f"all training labels are {int(y[0])}")
    return X, y


class _Sgd:
    """Plain SGD; first layer kept as ``scale * V`` so L2 shrink is O(1)."""

    def __init__(self, ws, bs, hyper):
        self.ws, self.bs = ws, bs
        self.lr, self.lam = hyper.learning_rate, hyper.lam
        if self.lr * self.lam >= 1.0:
            raise ValueError("learning_rate * lam must be < 1 for SGD")
        self.scale0 = 1.0

    def step(self, dws, dbs):
        ws, bs, lr, lam = self.ws, self.bs, self.lr, self.lam
        for l in range(1, len(ws)):
            ws[l] *= 1.0 - lr * lam
            ws[l] -= lr * dws[l]
            bs[l] -= lr * dbs[l]
        rows, g = dws[0]
        if lam:
            self.scale0 *= 1.0 - lr * lam
        ws[0][rows] -= (lr / self.scale0) * g
        bs[0] -= lr * dbs[0]
        if self.scale0 < _RESCALE_BELOW:
            self.finish()

    def finish(self):
        if self.scale0 != 1.0:
            self.ws[0] *= self.scale0
            self.scale0 = 1.0


class _Adam:
    """Adam on gradients that include the L2 term.

    First-layer rows are updated lazily: a row's moments and weights only
    advance on steps whose batch has a nonzero input for that feature.
    Bias correction uses the global step count.
    """

    scale0 = 1.0

    def __init__(self, ws, bs, hyper, beta1=0.9, beta2=0.999, eps=1e-8):
        self.ws, self.bs = ws, bs
        self.lr, self.lam = hyper.learning_rate, hyper.lam
        self.b1, self.b2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(w) for w in ws] + [np.zeros_like(b) for b in bs]
        self.v = [np.zeros_like(w) for w in ws] + [np.zeros_like(b) for b in bs]
        self.t = 0

    def _update(self, k, param, grad, rows=None):
        b1, b2 = self.b1, self.b2
        m, v = self.m[k], self.v[k]
        if rows is not None:
            m_r = b1 * m[rows] + (1.0 - b1) * grad
            v_r = b2 * v[rows] + (1.0 - b2) * grad * grad
            m[rows], v[rows] = m_r, v_r
        else:
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad * grad
            m_r, v_r = m, v
        step = self.lr * (m_r / self.c1) / (np.sqrt(v_r / self.c2) + self.eps)
        if rows is not None:
            param[rows] -= step
        else:
            param -= step

    def step(self, dws, dbs):
        self.t += 1
        self.c1 = 1.0 - self.b1 ** self.t
        self.c2 = 1.0 - self.b2 ** self.t
        ws, bs, lam = self.ws, self.bs, self.lam
        n_w = len(ws)
        rows, g = dws[0]
        if lam:
            g = g + lam * ws[0][rows]
        self._update(0, ws[0], g, rows)
        for l in range(1, n_w):
            self._update(l, ws[l], dws[l] + lam * ws[l] if lam else dws[l])
        for l in range(n_w):
            self._update(n_w + l, bs[l], dbs[l])

    def finish(self):
        pass


OPTIMIZERS = {"adam": _Adam, "sgd": _Sgd}


def train_mlp(X, y, hyper: MlpHyper = BASELINE) -> MlpModel:
    """Seeded mini-batch training; one Rng drives init, batch order and dropout.

    ``model.history`` holds the mean mini-batch objective of every epoch.
    """
    X, y = _check_xy(X, y)
    n, dim = X.shape
    rng = Rng(hyper.seed)
    model = init_model([dim, *hyper.hidden_dims, 1], rng, hyper.dropout_rate, hyper.lam)
    ws, bs = model.weights, model.biases
    opt = OPTIMIZERS[hyper.optimizer](ws, bs, hyper)
    keep = 1.0 - hyper.dropout_rate
    lam = hyper.lam
    yf = y.astype(np.float64)
    bsz = min(hyper.batch_size, n)

    # overflow is reported below as a non-finite loss, with context
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(hyper.epochs):
            order = rng.permutation(n)
            total, n_batches = 0.0, 0
            for start in range(0, n, bsz):
                idx = order[start:start + bsz]
                Xb, yb = X[idx], yf[idx]
                scale0 = opt.scale0
                drop_rng = rng if keep < 1.0 else None
                prob, pre, acts, masks = _forward(ws, bs, scale0, Xb, keep, drop_rng)
                sq = 0.0
                if lam:
                    sq = scale0 * scale0 * float(np.sum(ws[0] * ws[0]))
                    sq += sum(float(np.sum(w * w)) for w in ws[1:])
                obj = _objective(prob, yb, sq, lam)
                if not math.isfinite(obj):
                    raise DivergedTraining(
                        f"loss became {obj} at epoch {epoch + 1}, batch {n_batches + 1} "
                        f"(optimizer={hyper.optimizer}, learning_rate={hyper.learning_rate}, "
                        f"lam={lam})"
                    )
                total += obj
                n_batches += 1
                dws, dbs = _backward(ws, Cache(Xb, acts, pre, masks, prob, 0, 0), yb)
                opt.step(dws, dbs)
            model.history.append(total / n_batches)

    opt.finish()
    if not all(np.all(np.isfinite(a)) for a in ws + bs):
        raise DivergedTraining("training produced non-finite parameters")
    model.version += 1
    return model


def predict_mlp(model: MlpModel, x: SparseVector):
    """(label, probability of real); probability exactly 0.5 counts as real."""
    p, _ = forward(model, x)
    return (1 if p >= 0.5 else 0), p


def predict_mlp_many(model: MlpModel, X):
    prob, _ = forward_many(model, X)
    return (prob >= 0.5).astype(np.int64), prob
