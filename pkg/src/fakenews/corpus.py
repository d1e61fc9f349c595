"""Ingest labeled news CSVs, drop incomplete rows, encode labels and split.

Labels follow one fixed encoding throughout the toolkit: ``1`` is real news,
``0`` is fake news.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    DatasetNotFound,
    EmptyCorpus,
    MalformedCsv,
    MissingColumn,
    UnknownLabel,
    UnlabeledDocument,
)
from .rng import Rng

REAL = 1
FAKE = 0

DEFAULT_LABEL_MAP = {"real": REAL, "fake": FAKE, "1": REAL, "0": FAKE}


@dataclass(frozen=True)
class ColumnMapping:
    title: str = "title"
    body: str = "text"
    label: str | None = "label"


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class Document:
    id: int
    title: str
    body: str
    label: int | None = None
    raw_label: str | None = None

    @property
    def text(self):
        """Title and body joined by one space; the vectorizer's input."""
        return f"{self.title} {self.body}"


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    source: str = ""
    labeled: bool = True
    _ids: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        ids = frozenset(d.id for d in docs)
        if len(ids) != len(docs):
            raise ValueError("document ids must be unique within a corpus")
        object.__setattr__(self, "_ids", ids)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    @property
    def ids(self):
        return [d.id for d in self.documents]

    @property
    def labels(self):
        return [d.label for d in self.documents]

    def subset(self, positions):
        return Corpus(tuple(self.documents[i] for i in positions), self.source, self.labeled)


def _raise_field_limit():
    limit = sys.maxsize
    while True:
        try:
            csv.field_size_limit(limit)
            return
        except OverflowError:
            limit //= 10


def load_csv(path, schema: ColumnMapping = ColumnMapping()) -> Corpus:
    """Read a UTF-8, RFC-4180 CSV with a header row into a :class:`Corpus`.

    One Document per data row, in file order; ``id`` is the 0-based data-row
    ordinal. Raw label strings are kept untouched for :func:`encode_labels`.
    A ``schema.label`` of ``None`` reads an unlabeled corpus.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetNotFound(f"dataset not found: {path}")
    _raise_field_limit()

    docs = []
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file, header row required") from None
        except csv.Error as exc:
            raise MalformedCsv(f"{path}: header row: {exc}") from None

        wanted = [("title", schema.title), ("body", schema.body)]
        if schema.label is not None:
            wanted.append(("label", schema.label))
        pos = {}
        for role, name in wanted:
            if name not in header:
                raise MissingColumn(
                    f"{path}: column {name!r} ({role}) not in header {header}"
                )
            pos[role] = header.index(name)

        width = len(header)
        row_no = 0
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                raise MalformedCsv(
                    f"{path}: data row {row_no + 1} (line {reader.line_num}): {exc}"
                ) from None
            row_no += 1
            if not row:
                # a bare blank line is not a record
                continue
            if len(row) != width:
                raise MalformedCsv(
                    f"{path}: data row {row_no} (line {reader.line_num}) has "
                    f"{len(row)} fields, header has {width}"
                )
            docs.append(
                Document(
                    id=len(docs),
                    title=row[pos["title"]],
                    body=row[pos["body"]],
                    raw_label=row[pos["label"]] if "label" in pos else None,
                )
            )
    return Corpus(tuple(docs), str(path), labeled=schema.label is not None)


def is_missing(doc: Document, labeled=True):
    if not doc.body.strip():
        return True
    if labeled and doc.label is None and not (doc.raw_label or "").strip():
        return True
    return False


def drop_missing(corpus: Corpus) -> Corpus:
    """Keep documents with a non-blank body and, for labeled corpora, label."""
    kept = tuple(d for d in corpus if not is_missing(d, corpus.labeled))
    return Corpus(kept, corpus.source, corpus.labeled)


def encode_labels(corpus: Corpus, mapping=None) -> Corpus:
    """Map raw label strings to 0/1 (case-insensitive, whitespace-trimmed).

    Raises :class:`UnknownLabel` naming the 1-based data row (document id + 1)
    of the first unmapped value.
    """
    mapping = DEFAULT_LABEL_MAP if mapping is None else mapping
    table = {}
    for key, value in mapping.items():
        value = int(value)
        if value not in (REAL, FAKE):
            raise ValueError(f"label mapping value for {key!r} must be 0 or 1")
        table[str(key).strip().lower()] = value

    out = []
    for doc in corpus:
        if doc.raw_label is None:
            if doc.label is None:
                raise UnlabeledDocument(f"document {doc.id} has no label")
            out.append(doc)
            continue
        key = doc.raw_label.strip().lower()
        if key not in table:
            raise UnknownLabel(doc.raw_label, doc.id + 1)
        out.append(replace(doc, label=table[key]))
    return Corpus(tuple(out), corpus.source, True)


def _require_labels(corpus):
    for doc in corpus:
        if doc.label is None:
            raise UnlabeledDocument(f"document {doc.id} has no encoded label")


def n_test_docs(n, test_fraction):
    """round(test_fraction * n), halves rounded up."""
    return int(test_fraction * n + 0.5)


def split(corpus: Corpus, spec: SplitSpec = SplitSpec()) -> tuple[Corpus, Corpus]:
    """Seeded random (not stratified) train/test partition.

    The document positions are shuffled with :meth:`Rng.permutation`
    (Fisher-Yates over PCG64 seeded with ``spec.seed``); the first
    ``n_test_docs`` shuffled positions form the test set. Both halves keep the
    original corpus order.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("cannot split an empty corpus")
    _require_labels(corpus)
    n = len(corpus)
    n_test = n_test_docs(n, spec.test_fraction)
    perm = Rng(spec.seed).permutation(n)
    in_test = [False] * n
    for p in perm[:n_test].tolist():
        in_test[p] = True
    test_pos = [i for i in range(n) if in_test[i]]
    train_pos = [i for i in range(n) if not in_test[i]]
    return corpus.subset(train_pos), corpus.subset(test_pos)


def subsample(corpus: Corpus, n, seed) -> Corpus:
    """Seeded subset of ``n`` documents (order preserved); whole corpus if n >= len."""
    if n >= len(corpus):
        return corpus
    keep = sorted(Rng(seed).permutation(len(corpus))[:n].tolist())
    return corpus.subset(keep)


def label_distribution(corpus: Corpus) -> tuple[int, int]:
    """(count_real, count_fake)."""
    _require_labels(corpus)
    real = sum(1 for d in corpus if d.label == REAL)
    return real, len(corpus) - real
