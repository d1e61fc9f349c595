"""Versioned, checksummed, plain-text model files (``*.model``).

Layout, one record per line::

    FAKENEWS-MODEL
    version 1
    kind <logreg|svm|forest|mlp-baseline|mlp-regularized>
    config <one-line JSON training snapshot>
    tfidf <n_terms> <n_docs> <min_df> <normalize 0|1>
    <term> <df> <idf>                              x n_terms
    ...model payload (see _write_* below)...
    sha256 <hex digest of every byte above this line>

Reals are written with 17 significant digits, enough to round-trip any
double exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArtifactError, ChecksumMismatch, UnknownModelKind, UnsupportedVersion
from .forest import ForestHyper, ForestModel, Tree
from .linear import LinearModel
from .models import KINDS
from .neural import MlpModel
from .vectorize import TfidfModel, Vocabulary

MAGIC = "FAKENEWS-MODEL"
FORMAT_VERSION = 1
_CHUNK = 16


def _f(x):
    return format(float(x), ".17g")


def _floats(arr):
    return " ".join(map(_f, np.asarray(arr, dtype=np.float64).ravel().tolist()))


@dataclass
class ModelArtifact:
    kind: str
    tfidf: TfidfModel
    model: object
    config: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION
    checksum: str = ""


# -- writing -------------------------------------------------------------------


def _write_linear(m: LinearModel, out):
    out.append(f"linear {m.loss_kind} {_f(m.lam)} {_f(m.bias)} {m.dim}")
    w = m.weights
    for i in range(0, len(w), _CHUNK):
        out.append(_floats(w[i:i + _CHUNK]))


def _write_forest(m: ForestModel, out):
    h = m.hyper
    out.append(
        f"forest {m.n_trees} {m.max_depth} {m.n_features_per_split} {m.seed} {m.dim} "
        f"{h.max_thresholds} {int(h.bootstrap)}"
    )
    for t in m.trees:
        out.append(f"tree {len(t)}")
        for i in range(len(t)):
            out.append(
                f"{i} {int(t.feature[i])} {_f(t.threshold[i])} {int(t.left[i])} "
                f"{int(t.right[i])} {_f(t.counts[i, 0])} {_f(t.counts[i, 1])}"
            )


def _write_mlp(m: MlpModel, out):
    out.append(f"mlp {len(m.weights)} {_f(m.dropout_rate)} {_f(m.lam)}")
    out.append("dims " + " ".join(str(d) for d in m.layer_dims))
    for l, (w, b) in enumerate(zip(m.weights, m.biases)):
        out.append(f"layer {l} {w.shape[0]} {w.shape[1]}")
        for row in w:
            out.append(_floats(row))
        out.append(_floats(b))


_WRITERS = {"linear": _write_linear, "forest": _write_forest, "mlp": _write_mlp}


def dumps(artifact: ModelArtifact) -> bytes:
    if artifact.kind not in KINDS:
        raise UnknownModelKind(f"unknown model kind {artifact.kind!r}")
    tf = artifact.tfidf
    voc = tf.vocabulary
    out = [
        MAGIC,
        f"version {artifact.version}",
        f"kind {artifact.kind}",
        "config " + json.dumps(artifact.config, sort_keys=True),
        f"tfidf {len(voc)} {voc.n_docs} {tf.min_df} {int(tf.normalize)}",
    ]
    out.extend(f"{t} {d} {_f(i)}" for t, d, i in zip(voc.terms, voc.document_frequency, tf.idf))
    _WRITERS[KINDS[artifact.kind].family](artifact.model, out)
    body = ("\n".join(out) + "\n").encode("utf-8")
    digest = hashlib.sha256(body).hexdigest()
    artifact.checksum = digest
    return body + f"sha256 {digest}\n".encode("ascii")


def save_model(artifact: ModelArtifact, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(artifact))
    return path


# -- reading -------------------------------------------------------------------


class _Lines:
    def __init__(self, lines):
        self.lines = lines
        self.i = 0

    def next(self, prefix=None):
        if self.i >= len(self.lines):
            raise ArtifactError("truncated model file")
        line = self.lines[self.i]
        self.i += 1
        if prefix is not None:
            head, _, rest = line.partition(" ")
            if head != prefix:
                raise ArtifactError(f"line {self.i}: expected {prefix!r}, got {head!r}")
            return rest
        return line

    def floats(self):
        line = self.next()
        return np.array([float(t) for t in line.split()]) if line else np.zeros(0)


def _read_linear(r: _Lines):
    loss_kind, lam, bias, dim = r.next("linear").split()
    dim = int(dim)
    parts = []
    got = 0
    while got < dim:
        chunk = r.floats()
        parts.append(chunk)
        got += len(chunk)
    w = np.concatenate(parts) if parts else np.zeros(0)
    if len(w) != dim:
        raise ArtifactError(f"expected {dim} weights, found {len(w)}")
    return LinearModel(w, float(bias), loss_kind, float(lam))


def _read_forest(r: _Lines):
    n_trees, max_depth, k, seed, dim, max_thr, boot = (int(v) for v in r.next("forest").split())
    trees = []
    for _ in range(n_trees):
        n = int(r.next("tree"))
        rec = np.array([[float(v) for v in r.next().split()] for _ in range(n)]).reshape(n, 7)
        trees.append(Tree(
            rec[:, 1].astype(np.int64),
            rec[:, 2].copy(),
            rec[:, 3].astype(np.int64),
            rec[:, 4].astype(np.int64),
            rec[:, 5:7].copy(),
        ))
    hyper = ForestHyper(n_trees, max_depth, k, max_thr, bool(boot), seed)
    return ForestModel(trees, dim, n_trees, max_depth, k, seed, hyper)


def _read_mlp(r: _Lines):
    n_layers, dropout, lam = r.next("mlp").split()
    r.next("dims")
    ws, bs = [], []
    for l in range(int(n_layers)):
        _, rows, cols = (int(v) for v in r.next("layer").split())
        w = np.empty((rows, cols))
        for i in range(rows):
            w[i] = r.floats()
        ws.append(w)
        bs.append(r.floats())
    return MlpModel(ws, bs, float(dropout), float(lam))


_READERS = {"linear": _read_linear, "forest": _read_forest, "mlp": _read_mlp}


def loads(data: bytes) -> ModelArtifact:
    lines = data.split(b"\n")
    if len(lines) < 3 or lines[0] != MAGIC.encode():
        head_ok = False
    else:
        head_ok = True
    if head_ok and lines[1].startswith(b"version "):
        try:
            version = int(lines[1][8:])
        except ValueError:
            version = None
        if version is not None and version != FORMAT_VERSION:
            raise UnsupportedVersion(
                f"model format version {version} is not supported (expected {FORMAT_VERSION})"
            )

    body, sep, tail = data.rstrip(b"\n").rpartition(b"\n")
    if not sep or not tail.startswith(b"sha256 "):
        raise ChecksumMismatch("missing trailing checksum line")
    body += b"\n"
    expected = tail[7:].decode("ascii", "replace").strip()
    actual = hashlib.sha256(body).hexdigest()
    if actual != expected:
        raise ChecksumMismatch(f"checksum mismatch: file says {expected}, content is {actual}")
    if not head_ok:
        raise ArtifactError("not a model file (bad magic line)")

    r = _Lines(body.decode("utf-8").split("\n")[:-1])
    r.next()
    version = int(r.next("version"))
    kind = r.next("kind")
    if kind not in KINDS:
        raise UnknownModelKind(f"unknown model kind {kind!r}")
    config = json.loads(r.next("config"))
    n_terms, n_docs, min_df, normalize = (int(v) for v in r.next("tfidf").split())
    terms, dfs, idf = [], [], []
    for _ in range(n_terms):
        t, d, i = r.next().split(" ")
        terms.append(t)
        dfs.append(int(d))
        idf.append(float(i))
    tfidf = TfidfModel(Vocabulary(tuple(terms), tuple(dfs), n_docs), idf, bool(normalize), min_df)
    model = _READERS[KINDS[kind].family](r)
    return ModelArtifact(kind, tfidf, model, config, version, actual)


def load_model(path) -> ModelArtifact:
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"model file not found: {path}")
    try:
        return loads(path.read_bytes())
    except (ValueError, IndexError, UnicodeDecodeError) as exc:
        raise ArtifactError(f"{path}: unreadable model file: {exc}") from None
