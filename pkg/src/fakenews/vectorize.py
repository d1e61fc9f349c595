"""Tokenization and TF-IDF features.

Weighting used everywhere::

    tf(t, d)  = raw count of token t in document d (title + " " + body)
    idf(t)    = ln((1 + N) / (1 + df(t))) + 1
    value     = tf * idf
    normalize = value / sqrt(sum of squared values)

``N`` is the number of training documents and ``df(t)`` the number of them
containing ``t``. Floating-point order is fixed so results can be reproduced
bit for bit: ``idf`` is ``math.log((1 + N) / (1 + df)) + 1.0``; the squared
norm is a left-to-right Python sum over entries in increasing index order.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyCorpus, EmptyVocabulary

_TOKEN_RE = re.compile(r"[^\W_]+")
MIN_TOKEN_LEN = 2


def tokenize(text):
    """Lowercase, split on every non-alphanumeric character, drop 1-char tokens.

    >>> tokenize("Breaking NEWS: aliens-land!")
    ['breaking', 'news', 'aliens', 'land']
    """
    return [tok for tok in _TOKEN_RE.findall(text.lower()) if len(tok) >= MIN_TOKEN_LEN]


class SparseVector:
    """Sorted (index, value) pairs over a fixed dimensionality.

    Indices are strictly increasing and below ``dim``; zero values are never
    stored.
    """

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim, check=True):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.dim = int(dim)
        if check:
            self._check()

    def _check(self):
        idx, val = self.indices, self.values
        if idx.ndim != 1 or idx.shape != val.shape:
            raise ValueError("indices and values must be 1-d and equal length")
        if len(idx):
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError(f"index out of range for dim {self.dim}")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if np.any(val == 0.0):
                raise ValueError("explicit zeros are not stored")

    @classmethod
    def from_dict(cls, entries, dim):
        items = sorted((i, v) for i, v in entries.items() if v != 0.0)
        return cls([i for i, _ in items], [v for _, v in items], dim)

    @classmethod
    def zeros(cls, dim):
        return cls([], [], dim, check=False)

    @property
    def nnz(self):
        return len(self.indices)

    def to_dict(self):
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def scaled(self, factor):
        if factor == 0.0:
            return SparseVector.zeros(self.dim)
        return SparseVector(self.indices.copy(), self.values * factor, self.dim, check=False)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and self.values.tobytes() == other.values.tobytes()
        )

    def __repr__(self):
        return f"SparseVector(nnz={self.nnz}, dim={self.dim})"


def to_csr(vectors, dim=None):
    """Stack sparse vectors into a ``scipy.sparse.csr_matrix`` (one row each)."""
    if dim is None:
        if not vectors:
            raise ValueError("dim is required for an empty vector list")
        dim = vectors[0].dim
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        if v.dim != dim:
            raise DimensionMismatch(f"vector {i} has dim {v.dim}, expected {dim}")
        indptr[i + 1] = indptr[i] + v.nnz
    if vectors:
        indices = np.concatenate([v.indices for v in vectors])
        data = np.concatenate([v.values for v in vectors])
    else:
        indices = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def as_csr(X):
    """Accept a CSR matrix or a list of SparseVector."""
    if sp.issparse(X):
        return sp.csr_matrix(X)
    return to_csr(list(X))


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    document_frequency: tuple[int, ...]
    n_docs: int

    def __post_init__(self):
        if len(self.terms) != len(self.document_frequency):
            raise ValueError("terms and document_frequency differ in length")

    def __len__(self):
        return len(self.terms)


class TfidfModel:
    """Fitted vocabulary plus idf weights. Immutable after construction."""

    def __init__(self, vocabulary: Vocabulary, idf, normalize=True, min_df=1):
        self.vocabulary = vocabulary
        self.idf = tuple(float(v) for v in idf)
        self.normalize = bool(normalize)
        self.min_df = int(min_df)
        if len(self.idf) != len(vocabulary):
            raise ValueError("idf length must equal vocabulary size")
        self.index = {t: i for i, t in enumerate(vocabulary.terms)}

    @property
    def dim(self):
        return len(self.idf)

    def transform_tokens(self, tokens):
        counts = Counter(tok for tok in tokens if tok in self.index)
        if not counts:
            return SparseVector.zeros(self.dim)
        index, idf = self.index, self.idf
        pairs = sorted((index[t], c) for t, c in counts.items())
        idx = [i for i, _ in pairs]
        vals = [c * idf[i] for i, c in pairs]
        if self.normalize:
            sq = 0.0
            for v in vals:
                sq += v * v
            norm = math.sqrt(sq)
            vals = [v / norm for v in vals]
        return SparseVector(idx, vals, self.dim, check=False)

    def __eq__(self, other):
        if not isinstance(other, TfidfModel):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and self.idf == other.idf
            and self.normalize == other.normalize
            and self.min_df == other.min_df
        )


def smoothed_idf(n_docs, df):
    return math.log((1 + n_docs) / (1 + df)) + 1.0


def fit_tokens(token_lists, min_df=2, normalize=True) -> TfidfModel:
    """Fit a TfidfModel from pre-tokenized training documents."""
    n = len(token_lists)
    if n == 0:
        raise EmptyCorpus("cannot fit a vectorizer on zero documents")
    df = Counter()
    for toks in token_lists:
        df.update(set(toks))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    if not terms:
        raise EmptyVocabulary(f"no token appears in >= {min_df} of {n} training documents")
    dfs = tuple(df[t] for t in terms)
    vocab = Vocabulary(tuple(terms), dfs, n)
    return TfidfModel(vocab, [smoothed_idf(n, d) for d in dfs], normalize, min_df)


def fit(train, min_df=2, normalize=True) -> TfidfModel:
    """Fit on training documents only (their ``text``: title + " " + body)."""
    return fit_tokens([tokenize(d.text) for d in train], min_df, normalize)


def transform(model: TfidfModel, doc) -> SparseVector:
    """Features for one Document (or a raw string)."""
    text = doc if isinstance(doc, str) else doc.text
    return model.transform_tokens(tokenize(text))


def transform_corpus(model: TfidfModel, corpus) -> list[SparseVector]:
    return [transform(model, d) for d in corpus]


def fit_transform(train, min_df=2, normalize=True):
    """Fit on ``train`` and return (model, train vectors), tokenizing once."""
    tokens = [tokenize(d.text) for d in train]
    model = fit_tokens(tokens, min_df, normalize)
    return model, [model.transform_tokens(t) for t in tokens]
