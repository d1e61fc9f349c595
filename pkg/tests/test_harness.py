import csv
import json
import time
from dataclasses import replace

import numpy as np
import pytest

from fakenews import vectorize
from fakenews.config import load_config, parse_config
from fakenews.corpus import split
from fakenews.errors import DivergedTraining, PartialFailure, PipelineError
from fakenews.harness import BenchmarkResult, prepare, run_benchmark
from fakenews.models import KINDS
from fakenews.report import emit_report
from synth import make_corpus, write_csv

DETERMINISTIC_FILES = ("results.jsonl", "summary.json", "comparison.md", "predictions.csv",
                       "comparison.csv", "comparison.svg", "distribution.csv", "distribution.svg")


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestBenchmark:
    def test_all_models(self, fast_config):
        cfg = load_config(fast_config)
        res = run_benchmark(cfg)
        assert list(res.reports) == list(cfg.models)
        assert res.split_sizes == {"train": 160, "test": 40, "train_used": 160}
        assert res.dataset.rows == 200 and res.dataset.kept == 200
        out = cfg.output
        for name in DETERMINISTIC_FILES + ("timings.json",):
            assert (out / name).is_file()
        for kind in cfg.models:
            assert (out / f"{kind}.model").is_file()
        recs = [json.loads(l) for l in (out / "results.jsonl").read_text().splitlines()]
        assert len(recs) == 5
        assert {r["kind"] for r in recs} == set(cfg.models)
        assert "wall_time" not in recs[0] and "time" not in json.dumps(recs)
        assert [r["rank"] for r in recs] == [1, 2, 3, 4, 5]

    def test_byte_identical_reruns(self, fast_config, tmp_path):
        cfg = load_config(fast_config)
        a = replace(cfg, output_dir=str(tmp_path / "a"))
        b = replace(cfg, output_dir=str(tmp_path / "b"))
        run_benchmark(a)
        run_benchmark(b)
        for name in DETERMINISTIC_FILES + tuple(f"{k}.model" for k in cfg.models):
            assert (a.output / name).read_bytes() == (b.output / name).read_bytes(), name

    def test_logreg_only_fast(self, dataset, tmp_path):
        cfg = parse_config(f"[data]\npath = {dataset}\n[run]\nmodels = logreg\n"
                           f"output_dir = {tmp_path / 'o'}\n")
        t0 = time.perf_counter()
        res = run_benchmark(cfg)
        assert time.perf_counter() - t0 < 5.0
        assert len(res.table().rows) == 1

    def test_sample(self, fast_config):
        cfg = replace(load_config(fast_config), sample=50, models=("svm",))
        res = run_benchmark(cfg, persist=False)
        assert res.split_sizes == {"train": 160, "test": 40, "train_used": 50}
        assert res.reports["svm"].confusion.total == 40

    def test_partial_failure(self, fast_config, monkeypatch):
        def boom(X, y, hyper):
            raise DivergedTraining("loss became nan")

        monkeypatch.setitem(KINDS, "svm", replace(KINDS["svm"], train=boom))
        cfg = replace(load_config(fast_config), models=("logreg", "svm"))
        with pytest.raises(PartialFailure) as info:
            run_benchmark(cfg)
        assert set(info.value.failures) == {"svm"}
        assert "DivergedTraining" in info.value.failures["svm"]
        assert list(info.value.result.reports) == ["logreg"]
        assert (cfg.output / "results.jsonl").read_text().count("\n") == 1

    def test_stage_tagged_errors(self, tmp_path):
        cfg = parse_config(f"[data]\npath = {tmp_path / 'missing.csv'}\n")
        with pytest.raises(PipelineError, match=r"\[ingest\]") as info:
            run_benchmark(cfg)
        assert "missing.csv" in str(info.value)


class TestLeakage:
    def test_vocabulary_ignores_test_text(self, tmp_path):
        c = make_corpus(120, vocab=600, mean_len=30, seed=3)
        _, test = split(c)
        scrambled = make_corpus(120, vocab=5000, mean_len=30, seed=99)
        test_ids = set(test.ids)
        mixed = type(c)(tuple(
            replace(d, title=scrambled[d.id].title, body=scrambled[d.id].body)
            if d.id in test_ids else d
            for d in c
        ))
        paths = write_csv(c, tmp_path / "a.csv"), write_csv(mixed, tmp_path / "b.csv")
        fitted = []
        for p in paths:
            train, test2, _, _ = prepare(parse_config(f"[data]\npath = {p}\n"))
            assert test2.ids == test.ids
            fitted.append(vectorize.fit(train))
        assert fitted[0] == fitted[1]

    def test_shared_matrices(self, fast_config):
        res = run_benchmark(replace(load_config(fast_config), models=("logreg", "forest")),
                            persist=False)
        assert set(res.vector_checksums) == {"train", "test"}


class TestReport:
    def test_predictions_file(self, fast_config):
        cfg = load_config(fast_config)
        res = run_benchmark(cfg)
        rows = read_rows(cfg.output / "predictions.csv")
        assert rows[0][:4] == ["id", "true", "logreg", "logreg_probability"]
        assert len(rows) == 41
        svm_col = rows[0].index("svm")
        labels, _ = res.predictions["svm"]
        assert [int(r[svm_col]) for r in rows[1:]] == labels.tolist()

    def test_reload_and_reemit(self, fast_config, tmp_path):
        cfg = load_config(fast_config)
        run_benchmark(cfg)
        back = BenchmarkResult.from_files(cfg.output)
        emit_report(back, tmp_path / "again")
        for name in ("results.jsonl", "comparison.md", "comparison.svg"):
            assert (tmp_path / "again" / name).read_bytes() == (cfg.output / name).read_bytes()

    def test_markdown_header_and_balanced_chart(self, tmp_path):
        labels = [1, 0] * 50
        p = write_csv(make_corpus(100, labels=labels, vocab=600, mean_len=20, seed=1),
                      tmp_path / "d.csv")
        cfg = parse_config(f"[data]\npath = {p}\n[run]\nmodels = logreg\n"
                           f"output_dir = {tmp_path / 'o'}\n")
        run_benchmark(cfg)
        md = (cfg.output / "comparison.md").read_text()
        assert "| Model | Accuracy | Precision | Recall | f1-score |" in md
        assert read_rows(cfg.output / "distribution.csv")[1:] == [
            ["real", "50", "50.00"], ["fake", "50", "50.00"]]
        svg = (cfg.output / "distribution.svg").read_text()
        heights = [seg.split('height="')[1].split('"')[0] for seg in svg.split("<rect x=")[1:]]
        assert heights[0] == heights[1]
