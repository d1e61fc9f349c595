"""Random forest of Gini-split decision trees over sparse features.

Absent sparse entries count as value 0. Candidate thresholds for a feature
are the midpoints between consecutive distinct values observed in the node
(implicit zeros included); when there are more than ``max_thresholds``
boundaries, ``max_thresholds`` of them are taken at evenly spaced ranks of
the distinct-value list. A sample goes left when its value is <= threshold.

Ties between equally good splits go to the lowest feature index, then the
lowest threshold; leaf and forest vote ties go to class 1 (real).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyNode, SingleClassTraining
from .rng import Rng
from .vectorize import SparseVector, as_csr

LEAF = -1


@dataclass
class ForestHyper:
    n_trees: int = 100
    max_depth: int = 40
    n_features_per_split: int | None = None  # None -> ceil(sqrt(dim))
    max_thresholds: int = 32
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.max_thresholds < 1:
            raise ValueError("n_trees, max_depth and max_thresholds must be >= 1")
        if self.n_features_per_split is not None and self.n_features_per_split < 1:
            raise ValueError("n_features_per_split must be >= 1")


@dataclass
class Tree:
    """Flat node arrays; node 0 is the root, leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2): weighted class-0 / class-1 counts

    def __len__(self):
        return len(self.feature)

    def is_leaf(self, i):
        return self.feature[i] == LEAF

    def depth(self):
        depth = np.zeros(len(self), dtype=np.int64)
        for i in range(len(self)):
            if not self.is_leaf(i):
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def leaf_vote(self, i):
        c0, c1 = self.counts[i]
        return 1 if c1 >= c0 else 0

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("feature", "threshold", "left", "right", "counts")
        )


@dataclass
class ForestModel:
    trees: list
    dim: int
    n_trees: int
    max_depth: int
    n_features_per_split: int
    seed: int
    hyper: ForestHyper = field(default_factory=ForestHyper)


# -- numba kernels -------------------------------------------------------------


@numba.njit(cache=True)
def _mulhi(a, b):
    """High 64 bits of the 128-bit product of two uint64 values."""
    mask = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    a_lo, a_hi = a & mask, a >> s32
    b_lo, b_hi = b & mask, b >> s32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> s32) + (hi_lo & mask) + lo_hi
    return hi_hi + (hi_lo >> s32) + (cross >> s32)


@numba.njit(cache=True)
def _partial_shuffle(pool, words, k):
    # same draw rule as Rng.partial_shuffle
    n = pool.shape[0]
    for i in range(k):
        j = i + np.int64(_mulhi(words[i], np.uint64(n - i)))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp


@numba.njit(cache=True)
def _best_threshold(vals, wts, ys, m, z0, z1, t0, t1, max_thr, best_score, tol):
    """Best split of one feature given its ``m`` nonzero node entries.

    (z0, z1) are the class weights of node samples where the feature is
    absent. Score is sum over children of (c0^2 + c1^2) / n_child, to be
    maximised; only scores beating ``best_score + tol`` are taken.
    Returns (score, threshold, found).
    """
    has_zero = (z0 + z1) > 0.0
    n_all = m + 1 if has_zero else m
    v_all = np.empty(n_all)
    w0_all = np.zeros(n_all)
    w1_all = np.zeros(n_all)
    for q in range(m):
        v_all[q] = vals[q]
        if ys[q] == 1:
            w1_all[q] = wts[q]
        else:
            w0_all[q] = wts[q]
    if has_zero:
        v_all[m] = 0.0
        w0_all[m] = z0
        w1_all[m] = z1
    order = np.argsort(v_all)

    # distinct values, each with its cumulative class weights
    dv = np.empty(n_all)
    c0 = np.empty(n_all)
    c1 = np.empty(n_all)
    nd = 0
    a0 = 0.0
    a1 = 0.0
    for q in range(n_all):
        k = order[q]
        a0 += w0_all[k]
        a1 += w1_all[k]
        if nd > 0 and dv[nd - 1] == v_all[k]:
            c0[nd - 1] = a0
            c1[nd - 1] = a1
        else:
            dv[nd] = v_all[k]
            c0[nd] = a0
            c1[nd] = a1
            nd += 1

    n_bound = nd - 1
    best_thr = 0.0
    found = False
    n_cand = n_bound if n_bound <= max_thr else max_thr
    for c in range(n_cand):
        q = c if n_bound <= max_thr else (c * n_bound) // max_thr
        l0 = c0[q]
        l1 = c1[q]
        r0 = t0 - l0
        r1 = t1 - l1
        nl = l0 + l1
        nr = r0 + r1
        score = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr
        if score > best_score + tol:
            best_score = score
            best_thr = 0.5 * (dv[q] + dv[q + 1])
            found = True
    return best_score, best_thr, found


@numba.njit(cache=True)
def _find_split(
    c_ptr, c_row, c_val, r_ptr, r_col, r_val,
    rows, w, y, feats, mark, stamp, fmark, max_thr,
):
    """Best (feature, threshold) over ``feats`` (sorted ascending) for one node.

    ``mark[row] == stamp`` flags node membership; ``fmark`` is scratch of
    length dim holding -1 everywhere. Returns (feature, threshold, found).
    """
    t0 = 0.0
    t1 = 0.0
    for r in rows:
        mark[r] = stamp
        if y[r] == 1:
            t1 += w[r]
        else:
            t0 += w[r]
    total = t0 + t1
    parent = (t0 * t0 + t1 * t1) / total
    tol = 1e-12 * total
    best = parent
    best_f = -1
    best_t = 0.0

    nf = feats.shape[0]
    col_cost = 0
    for f in feats:
        col_cost += c_ptr[f + 1] - c_ptr[f]
    row_cost = 0
    for r in rows:
        row_cost += r_ptr[r + 1] - r_ptr[r]

    # gather (feature slot, value, row) for nonzero node entries
    cap = col_cost if col_cost < row_cost else row_cost
    g_slot = np.empty(cap, dtype=np.int64)
    g_val = np.empty(cap)
    g_row = np.empty(cap, dtype=np.int64)
    ng = 0
    if col_cost <= row_cost:
        for s in range(nf):
            f = feats[s]
            for k in range(c_ptr[f], c_ptr[f + 1]):
                r = c_row[k]
                if mark[r] == stamp:
                    g_slot[ng] = s
                    g_val[ng] = c_val[k]
                    g_row[ng] = r
                    ng += 1
    else:
        for s in range(nf):
            fmark[feats[s]] = s
        for r in rows:
            for k in range(r_ptr[r], r_ptr[r + 1]):
                s = fmark[r_col[k]]
                if s >= 0:
                    g_slot[ng] = s
                    g_val[ng] = r_val[k]
                    g_row[ng] = r
                    ng += 1
        for s in range(nf):
            fmark[feats[s]] = -1

    # bucket gathered entries by feature slot
    start = np.zeros(nf + 1, dtype=np.int64)
    for q in range(ng):
        start[g_slot[q] + 1] += 1
    for s in range(nf):
        start[s + 1] += start[s]
    fill = start[:nf].copy()
    vals = np.empty(ng)
    wts = np.empty(ng)
    ys = np.empty(ng, dtype=np.int64)
    for q in range(ng):
        s = g_slot[q]
        p = fill[s]
        fill[s] += 1
        vals[p] = g_val[q]
        wts[p] = w[g_row[q]]
        ys[p] = y[g_row[q]]

    for s in range(nf):
        lo = start[s]
        m = start[s + 1] - lo
        nz0 = 0.0
        nz1 = 0.0
        for q in range(lo, lo + m):
            if ys[q] == 1:
                nz1 += wts[q]
            else:
                nz0 += wts[q]
        score, thr, found = _best_threshold(
            vals[lo:lo + m], wts[lo:lo + m], ys[lo:lo + m], m,
            t0 - nz0, t1 - nz1, t0, t1, max_thr, best, tol,
        )
        if found:
            best = score
            best_f = feats[s]
            best_t = thr
    return best_f, best_t, best_f >= 0


@numba.njit(cache=True)
def _feature_values(c_ptr, c_row, c_val, f, rows, mark, stamp, scratch):
    for r in rows:
        mark[r] = stamp
        scratch[r] = 0.0
    for k in range(c_ptr[f], c_ptr[f + 1]):
        r = c_row[k]
        if mark[r] == stamp:
            scratch[r] = c_val[k]
    out = np.empty(rows.shape[0])
    for i in range(rows.shape[0]):
        out[i] = scratch[rows[i]]
    return out


@numba.njit(cache=True)
def _predict_votes(ptr, ind, dat, feature, threshold, left, right, leaf_vote, offsets):
    """Per-row count of trees voting class 1; trees packed back to back."""
    n_rows = ptr.shape[0] - 1
    n_trees = offsets.shape[0] - 1
    votes = np.zeros(n_rows, dtype=np.int64)
    for r in range(n_rows):
        lo = ptr[r]
        hi = ptr[r + 1]
        for t in range(n_trees):
            base = offsets[t]
            node = 0
            while feature[base + node] >= 0:
                f = feature[base + node]
                pos = np.searchsorted(ind[lo:hi], f)
                v = 0.0
                if pos < hi - lo and ind[lo + pos] == f:
                    v = dat[lo + pos]
                if v <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            votes[r] += leaf_vote[base + node]
    return votes


# -- training ------------------------------------------------------------------


def gini(c0, c1):
    n = c0 + c1
    if n == 0:
        return 0.0
    return 1.0 - (c0 / n) ** 2 - (c1 / n) ** 2


class _Data:
    """CSR + CSC views of a training matrix, shared by every tree."""

    def __init__(self, X, y):
        csr = as_csr(X)
        csr.sort_indices()
        csc = sp.csc_matrix(csr)
        csc.sort_indices()
        self.n, self.dim = csr.shape
        self.r_ptr = csr.indptr.astype(np.int64)
        self.r_col = csr.indices.astype(np.int64)
        self.r_val = csr.data.astype(np.float64)
        self.c_ptr = csc.indptr.astype(np.int64)
        self.c_row = csc.indices.astype(np.int64)
        self.c_val = csc.data.astype(np.float64)
        self.y = np.asarray(y, dtype=np.int64)


def _grow(data, weights, rng, depth_limit, k_feats, max_thr):
    rows0 = np.flatnonzero(weights > 0).astype(np.int64)
    if len(rows0) == 0:
        raise EmptyNode("cannot grow a tree from zero samples")
    w = weights.astype(np.float64)
    y = data.y
    mark = np.full(data.n, -1, dtype=np.int64)
    fmark = np.full(data.dim, -1, dtype=np.int64)
    scratch = np.zeros(data.n)
    pool = np.arange(data.dim, dtype=np.int64)
    k_feats = min(k_feats, data.dim)
    subsample = k_feats < data.dim

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(rows):
        c1 = float(w[rows][y[rows] == 1].sum())
        c0 = float(w[rows].sum()) - c1
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append((c0, c1))
        return len(feature) - 1

    stamp = 0
    stack = [(new_node(rows0), rows0, 0)]
    while stack:
        node, rows, depth = stack.pop()
        c0, c1 = counts[node]
        if depth >= depth_limit or c0 == 0 or c1 == 0:
            continue
        if subsample:
            words = rng.raw(k_feats)
            _partial_shuffle(pool, words, k_feats)
            feats = np.sort(pool[:k_feats])
        else:
            feats = pool
        stamp += 1
        f, thr, found = _find_split(
            data.c_ptr, data.c_row, data.c_val, data.r_ptr, data.r_col, data.r_val,
            rows, w, y, feats, mark, stamp, fmark, max_thr,
        )
        if not found:
            continue
        stamp += 1
        vals = _feature_values(data.c_ptr, data.c_row, data.c_val, f, rows, mark, stamp, scratch)
        go_left = vals <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node] = int(f)
        threshold[node] = float(thr)
        li, ri = new_node(lrows), new_node(rrows)
        left[node], right[node] = li, ri
        # right pushed first so the left subtree is expanded first
        stack.append((ri, rrows, depth + 1))
        stack.append((li, lrows, depth + 1))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(counts, dtype=np.float64).reshape(-1, 2),
    )


def features_per_split(dim, n_features_per_split=None):
    if n_features_per_split is None:
        return max(1, math.ceil(math.sqrt(dim)))
    return min(int(n_features_per_split), dim)


def train_tree(X, y, rng, depth_limit, n_features_per_split=None, sample_weight=None,
               max_thresholds=32) -> Tree:
    """Grow one tree. ``n_features_per_split=None`` considers every feature."""
    data = X if isinstance(X, _Data) else _Data(X, y)
    if data.n == 0:
        raise EmptyNode("cannot grow a tree from zero samples")
    if sample_weight is None:
        sample_weight = np.ones(data.n, dtype=np.int64)
    k = data.dim if n_features_per_split is None else n_features_per_split
    return _grow(data, np.asarray(sample_weight), rng, depth_limit, k, max_thresholds)


def _check_training(X, y):
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} inputs but {len(y)} labels")
    if len(y) < 2:
        raise SingleClassTraining("need at least two training examples")
    if y.min() == y.max():
        raise SingleClassTraining(f"all training labels are {int(y[0])}")
    return X, y


def train_forest(X, y, hyper: ForestHyper = ForestHyper(), seed=None) -> ForestModel:
    """Bagged trees; tree ``i`` draws everything from ``Rng(seed + i)``."""
    X, y = _check_training(X, y)
    seed = hyper.seed if seed is None else seed
    data = _Data(X, y)
    k = features_per_split(data.dim, hyper.n_features_per_split)
    trees = []
    for i in range(hyper.n_trees):
        rng = Rng(seed + i)
        if hyper.bootstrap:
            weights = np.bincount(rng.integers(data.n, data.n), minlength=data.n)
        else:
            weights = np.ones(data.n, dtype=np.int64)
        trees.append(_grow(data, weights, rng, hyper.max_depth, k, hyper.max_thresholds))
    return ForestModel(trees, data.dim, hyper.n_trees, hyper.max_depth, k, seed, hyper)


# -- prediction ----------------------------------------------------------------


def _packed(model):
    cache = getattr(model, "_packed_cache", None)
    if cache is not None:
        return cache
    offsets = np.zeros(len(model.trees) + 1, dtype=np.int64)
    for i, t in enumerate(model.trees):
        offsets[i + 1] = offsets[i] + len(t)
    cat = lambda name: np.concatenate([getattr(t, name) for t in model.trees])
    votes = np.concatenate(
        [(t.counts[:, 1] >= t.counts[:, 0]).astype(np.int64) for t in model.trees]
    )
    packed = (cat("feature"), cat("threshold"), cat("left"), cat("right"), votes, offsets)
    model._packed_cache = packed
    return packed


def votes_for_real(model: ForestModel, X) -> np.ndarray:
    X = as_csr(X)
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"input dim {X.shape[1]} != model dim {model.dim}")
    X.sort_indices()
    return _predict_votes(
        X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data.astype(np.float64),
        *_packed(model),
    )


def predict_forest_many(model: ForestModel, X):
    """(labels, vote fractions) for every row of ``X``."""
    ones = votes_for_real(model, X)
    n = model.n_trees
    labels = (2 * ones >= n).astype(np.int64)
    winning = np.where(labels == 1, ones, n - ones)
    return labels, winning / n


def predict_forest(model: ForestModel, x: SparseVector):
    """(label, fraction of trees voting for that label)."""
    labels, frac = predict_forest_many(model, [x])
    return int(labels[0]), float(frac[0])
