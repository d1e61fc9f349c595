"""End-to-end benchmark: ingest, clean, encode, split, vectorize, train, evaluate.

Metrics are computed on the held-out test split. The vectorizer is fitted on
training documents only, and every enabled model trains on the very same
train vectors and is scored on the very same test vectors.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import vectorize
from .artifact import ModelArtifact, save_model
from .config import RunConfig
from .errors import FakeNewsError, PartialFailure, PipelineError
from .evaluation import MetricsReport, compare, evaluate
from .models import KINDS

log = logging.getLogger(__name__)


@dataclass
class DatasetStats:
    rows: int
    dropped: int
    real: int
    fake: int

    @property
    def kept(self):
        return self.real + self.fake


@dataclass
class BenchmarkResult:
    reports: dict                      # model kind -> MetricsReport, enabled order
    dataset: DatasetStats
    split_sizes: dict                  # train, test, train_used
    config: dict
    vocabulary_size: int = 0
    vector_checksums: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)   # kind -> (labels, scores)
    test_ids: list = field(default_factory=list)
    test_labels: list = field(default_factory=list)

    def table(self):
        return compare(self.reports.values())

    def summary(self):
        """Deterministic run description (no timings)."""
        return {
            "dataset": {
                "rows": self.dataset.rows,
                "dropped_missing": self.dataset.dropped,
                "real": self.dataset.real,
                "fake": self.dataset.fake,
            },
            "split": self.split_sizes,
            "vocabulary_size": self.vocabulary_size,
            "vector_checksums": self.vector_checksums,
            "models": list(self.reports),
            "failures": self.failures,
            "config": self.config,
        }

    @classmethod
    def from_files(cls, out_dir):
        """Rebuild the reportable parts of a result from an output directory."""
        from .evaluation import ConfusionMatrix

        out_dir = Path(out_dir)
        summary = json.loads((out_dir / "summary.json").read_text())
        timings = {}
        if (out_dir / "timings.json").is_file():
            timings = json.loads((out_dir / "timings.json").read_text())
        reports = {}
        with (out_dir / "results.jsonl").open() as fh:
            for line in fh:
                rec = json.loads(line)
                cm = ConfusionMatrix(rec["tp"], rec["fp"], rec["fn"], rec["tn"])
                reports[rec["kind"]] = MetricsReport(
                    rec["model"], rec["accuracy"], rec["precision"], rec["recall"], rec["f1"],
                    cm, timings.get("train", {}).get(rec["kind"], 0.0),
                )
        ds = summary["dataset"]
        ordered = {k: reports[k] for k in summary["models"] if k in reports}
        return cls(
            ordered,
            DatasetStats(ds["rows"], ds["dropped_missing"], ds["real"], ds["fake"]),
            summary["split"],
            summary["config"],
            summary["vocabulary_size"],
            summary["vector_checksums"],
            timings,
            summary.get("failures", {}),
        )


@contextmanager
def stage(name, timings=None):
    t0 = time.perf_counter()
    try:
        yield
    except PipelineError:
        raise
    except (FakeNewsError, OSError, ValueError) as exc:
        raise PipelineError(name, exc) from exc
    finally:
        if timings is not None:
            timings[name] = round(time.perf_counter() - t0, 3)


def matrix_checksum(X):
    h = hashlib.sha256()
    for a in (X.indptr, X.indices, X.data):
        h.update(np.ascontiguousarray(a).tobytes())
    h.update(repr(X.shape).encode())
    return h.hexdigest()


def prepare(config: RunConfig, timings=None):
    """Stages up to the split.

    Returns (train corpus, test corpus, DatasetStats, train size before
    ``sample`` subsampling).
    """
    timings = {} if timings is None else timings
    with stage("ingest", timings):
        raw = corpus_mod.load_csv(config.dataset, config.columns)
    with stage("clean", timings):
        cleaned = corpus_mod.drop_missing(raw)
    with stage("encode", timings):
        labeled = corpus_mod.encode_labels(cleaned, config.label_map)
        real, fake = corpus_mod.label_distribution(labeled)
    with stage("split", timings):
        train, test = corpus_mod.split(labeled, config.split)
        n_train = len(train)
        if config.sample:
            train = corpus_mod.subsample(train, config.sample, config.seed)
    stats = DatasetStats(len(raw), len(raw) - len(cleaned), real, fake)
    return train, test, stats, n_train


def run_benchmark(config: RunConfig, persist=True) -> BenchmarkResult:
    timings = {}
    train, test, stats, n_train = prepare(config, timings)
    log.info("dataset: %d rows, %d dropped, %d real / %d fake",
             stats.rows, stats.dropped, stats.real, stats.fake)

    with stage("vectorize", timings):
        tfidf, train_vecs = vectorize.fit_transform(train, config.min_df, config.normalize)
        test_vecs = vectorize.transform_corpus(tfidf, test)
        Xtr = vectorize.to_csr(train_vecs, tfidf.dim)
        Xte = vectorize.to_csr(test_vecs, tfidf.dim)
    y_train = np.asarray(train.labels, dtype=np.int64)
    y_test = np.asarray(test.labels, dtype=np.int64)
    sums = {"train": matrix_checksum(Xtr), "test": matrix_checksum(Xte)}
    log.info("vocabulary: %d terms; train %d docs, test %d docs", tfidf.dim, len(train), len(test))

    reports, failures, predictions, models = {}, {}, {}, {}
    timings["train"] = {}
    for kind in config.models:
        spec = KINDS[kind]
        hyper = config.model_hyper(kind)
        t0 = time.perf_counter()
        try:
            with stage(f"train:{kind}"):
                model = spec.train(Xtr, y_train, hyper)
            with stage(f"evaluate:{kind}"):
                labels, scores = spec.predict_many(model, Xte)
        except PipelineError as exc:
            log.error("%s", exc)
            failures[kind] = str(exc)
            continue
        elapsed = round(time.perf_counter() - t0, 3)
        timings["train"][kind] = elapsed
        if matrix_checksum(Xtr) != sums["train"] or matrix_checksum(Xte) != sums["test"]:
            raise PipelineError(f"train:{kind}", RuntimeError("shared feature matrix was modified"))
        reports[kind] = evaluate(spec.display, y_test, labels, elapsed)
        predictions[kind] = (labels, scores)
        models[kind] = model
        log.info("%s: accuracy %.4f (%.1fs)", kind, reports[kind].accuracy, elapsed)

    result = BenchmarkResult(
        reports,
        stats,
        {"train": n_train, "test": len(test), "train_used": len(train)},
        config.snapshot(),
        tfidf.dim,
        sums,
        timings,
        failures,
        predictions,
        test.ids,
        y_test.tolist(),
    )
    if persist:
        from .report import emit_report

        out = config.output
        with stage("persist", timings):
            out.mkdir(parents=True, exist_ok=True)
            if config.save_models:
                for kind, model in models.items():
                    art = ModelArtifact(kind, tfidf, model, {
                        "hyper": result.config["hyper"][kind],
                        "vectorizer": result.config["vectorizer"],
                        "split": result.config["split"],
                    })
                    save_model(art, out / f"{kind}.model")
            write_predictions(result, out / "predictions.csv")
            emit_report(result, out)

    if failures:
        raise PartialFailure(failures, result)
    return result


def write_predictions(result: BenchmarkResult, path):
    kinds = list(result.predictions)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["id", "true"]
        for k in kinds:
            header += [f"{k}", f"{k}_{KINDS[k].score_name}"]
        w.writerow(header)
        for i, doc_id in enumerate(result.test_ids):
            row = [doc_id, result.test_labels[i]]
            for k in kinds:
                labels, scores = result.predictions[k]
                row += [int(labels[i]), format(float(scores[i]), ".17g")]
            w.writerow(row)
    return path
