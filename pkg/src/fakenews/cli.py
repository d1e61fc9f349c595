"""Command-line entry point: ``fakenews <subcommand> [--flags]``.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
dataset, config or model file), 3 runtime failure (training or model error).
Results go to standard output; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import vectorize
from .artifact import ModelArtifact, load_model, save_model
from .config import MODEL_KINDS, RunConfig, _convert, _keys_for, load_config
from .errors import DataError, FakeNewsError, PartialFailure, PipelineError
from .evaluation import compare, evaluate, pct
from .harness import prepare, run_benchmark
from .models import KINDS, predict_one
from .report import emit_report, result_records

log = logging.getLogger("fakenews")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt():
    return argparse.ArgumentDefaultsHelpFormatter


def _data_flags(p):
    p.add_argument("--config", help="run config file (INI); built-in defaults if omitted")
    p.add_argument("--dataset", help="CSV dataset path, overrides [data] path")


def _run_flags(p):
    p.add_argument("--sample", type=int, default=None,
                   help="train on a seeded subsample of N training documents (0 = all); "
                        "overrides [run] sample")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for model training and --sample, overrides [run] seed")


def _format_flag(p):
    p.add_argument("--format", choices=("text", "md", "records"), default="text",
                   help="table output format")


def build_parser():
    parser = _Parser(prog="fakenews", description=__doc__.split("\n")[0],
                     formatter_class=_fmt())
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="load, clean and label-encode a dataset",
                       formatter_class=_fmt())
    _data_flags(p)
    p.add_argument("--out", help="write the cleaned corpus as CSV (id,title,text,label)")

    p = sub.add_parser("stats", help="row counts and real/fake distribution",
                       formatter_class=_fmt())
    _data_flags(p)

    p = sub.add_parser("train", help="train one model kind and write a .model file",
                       formatter_class=_fmt())
    p.add_argument("--model", required=True, choices=MODEL_KINDS, help="model kind")
    _data_flags(p)
    _run_flags(p)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="hyperparameter override using the model's config keys "
                        "(e.g. epochs=5, lambda=0.001); repeatable")
    p.add_argument("--out", help="model file path; <model>.model if omitted")

    p = sub.add_parser("evaluate", help="score a .model file on the config's test split",
                       formatter_class=_fmt())
    p.add_argument("--artifact", required=True, help="model file to evaluate")
    _data_flags(p)
    _format_flag(p)

    p = sub.add_parser("classify", help="label texts as REAL or FAKE with a .model file",
                       formatter_class=_fmt())
    p.add_argument("--artifact", required=True, help="model file")
    p.add_argument("--text", action="append", default=[], help="text to classify; repeatable")
    p.add_argument("--file", help="file with one text per line")

    p = sub.add_parser("benchmark", help="train and evaluate every enabled model",
                       formatter_class=_fmt())
    p.add_argument("config", help="run config file, e.g. paper.cfg")
    _run_flags(p)
    p.add_argument("--out", help="output directory, overrides [run] output_dir")
    _format_flag(p)

    p = sub.add_parser("report", help="re-render the tables and charts of a benchmark run",
                       formatter_class=_fmt())
    p.add_argument("--results", required=True, help="benchmark output directory")
    p.add_argument("--out", help="directory to (re)write report files into")
    _format_flag(p)
    return parser


# -- helpers -------------------------------------------------------------------


def _config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {}
    if getattr(args, "dataset", None):
        changes["dataset_path"] = str(Path(args.dataset).resolve())
    if getattr(args, "sample", None) is not None:
        changes["sample"] = args.sample
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return replace(cfg, **changes) if changes else cfg


def _render(table, fmt, records=None):
    if fmt == "md":
        return table.render_markdown()
    if fmt == "records":
        recs = records if records is not None else table.records()
        return "".join(json.dumps(r) + "\n" for r in recs)
    return table.render_text()


def _print(text=""):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _distribution_line(real, fake):
    n = max(1, real + fake)
    return f"real: {real} ({100 * real / n:.2f}%) fake: {fake} ({100 * fake / n:.2f}%)"


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args):
    cfg = _config(args)
    raw = corpus_mod.load_csv(cfg.dataset, cfg.columns)
    cleaned = corpus_mod.drop_missing(raw)
    labeled = corpus_mod.encode_labels(cleaned, cfg.label_map)
    _print(f"source: {cfg.dataset}")
    _print(f"rows: {len(raw)}")
    _print(f"dropped (missing values): {len(raw) - len(cleaned)}")
    _print(f"kept: {len(labeled)}")
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "title", "text", "label"])
            for d in labeled:
                w.writerow([d.id, d.title, d.body, d.label])
        _print(f"wrote: {args.out}")
    return EXIT_OK


def cmd_stats(args):
    cfg = _config(args)
    raw = corpus_mod.load_csv(cfg.dataset, cfg.columns)
    cleaned = corpus_mod.drop_missing(raw)
    labeled = corpus_mod.encode_labels(cleaned, cfg.label_map)
    real, fake = corpus_mod.label_distribution(labeled)
    _print(f"rows: {len(raw)}")
    _print(f"dropped: {len(raw) - len(cleaned)}")
    _print(_distribution_line(real, fake))
    return EXIT_OK


def _apply_params(cfg, kind, params):
    keys = _keys_for(kind)
    updates = {}
    for item in params:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in keys:
            raise UsageError(
                f"--param {item!r}: expected KEY=VALUE with KEY in {', '.join(sorted(keys))}"
            )
        updates["lam" if key == "lambda" else key] = _convert(keys[key], value, f"--param {key}")
    if not updates:
        return cfg
    try:
        new = replace(cfg.hyper[kind], **updates)
    except ValueError as exc:
        raise UsageError(f"--param: {exc}") from None
    return replace(cfg, hyper={**cfg.hyper, kind: new})


def cmd_train(args):
    kind = args.model
    cfg = _apply_params(_config(args), kind, args.param)
    cfg = replace(cfg, models=(kind,))
    train, test, stats, _ = prepare(cfg)
    spec = KINDS[kind]
    try:
        tfidf, train_vecs = vectorize.fit_transform(train, cfg.min_df, cfg.normalize)
    except FakeNewsError as exc:
        raise PipelineError("vectorize", exc) from exc
    Xtr = vectorize.to_csr(train_vecs, tfidf.dim)
    Xte = vectorize.to_csr(vectorize.transform_corpus(tfidf, test), tfidf.dim)
    ytr, yte = np.asarray(train.labels), np.asarray(test.labels)
    try:
        model = spec.train(Xtr, ytr, cfg.model_hyper(kind))
    except FakeNewsError as exc:
        raise PipelineError(f"train:{kind}", exc) from exc
    snap = cfg.snapshot()
    art = ModelArtifact(kind, tfidf, model, {
        "hyper": snap["hyper"][kind], "vectorizer": snap["vectorizer"], "split": snap["split"],
    })
    out = Path(args.out or f"{kind}.model")
    save_model(art, out)
    for name, X, y in (("train", Xtr, ytr), ("test", Xte, yte)):
        labels, _ = spec.predict_many(model, X)
        r = evaluate(spec.display, y, labels)
        _print(f"{name}: accuracy {pct(r.accuracy)} precision {pct(r.precision)} "
               f"recall {pct(r.recall)} f1 {pct(r.f1)} (n={len(y)})")
    _print(f"wrote: {out}")
    return EXIT_OK


def cmd_evaluate(args):
    art = load_model(args.artifact)
    cfg = _config(args)
    _, test, _, _ = prepare(cfg)
    X = vectorize.to_csr(vectorize.transform_corpus(art.tfidf, test), art.tfidf.dim)
    labels, _ = KINDS[art.kind].predict_many(art.model, X)
    report = evaluate(KINDS[art.kind].display, test.labels, labels)
    _print(_render(compare([report]), args.format))
    return EXIT_OK


def cmd_classify(args):
    texts = list(args.text)
    if args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                texts += [line.rstrip("\r\n") for line in fh]
        except OSError as exc:
            raise DataError(f"cannot read {args.file}: {exc}") from None
    if not texts:
        raise UsageError("no input: give --text and/or --file")
    art = load_model(args.artifact)
    score_name = KINDS[art.kind].score_name
    for text in texts:
        label, score = predict_one(art.kind, art.model, vectorize.transform(art.tfidf, text))
        _print(f"{'REAL' if label == 1 else 'FAKE'}\t{score_name}={score:.6f}")
    return EXIT_OK


def _sources(cfg, args):
    rows = []
    for name, key, flag in (("seed", "run.seed", args.seed), ("sample", "run.sample", args.sample),
                            ("output_dir", "run.output_dir", args.out)):
        src = "flag" if flag is not None else ("config" if key in cfg.explicit else "default")
        rows.append(f"# {name} = {getattr(cfg, name)} ({src})")
    rows.append(f"# dataset = {cfg.dataset_path}")
    rows.append(f"# split = test_fraction {cfg.split.test_fraction}, seed {cfg.split.seed}")
    rows.append(f"# models = {', '.join(cfg.models)}")
    return "\n".join(rows)


def cmd_benchmark(args):
    cfg = _config(args)
    if args.out:
        cfg = replace(cfg, output_dir=str(Path(args.out).resolve()))
    _print(_sources(cfg, args))
    status = EXIT_OK
    try:
        result = run_benchmark(cfg)
    except PartialFailure as exc:
        result = exc.result
        for kind, msg in sorted(exc.failures.items()):
            print(f"fakenews: model {kind} failed: {msg}", file=sys.stderr)
        status = EXIT_RUNTIME
    _print(_render(result.table(), args.format, result_records(result)))
    return status


def cmd_report(args):
    from .harness import BenchmarkResult

    src = Path(args.results)
    try:
        result = BenchmarkResult.from_files(src)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read benchmark results in {src}: {exc}") from None
    if args.out:
        for path in emit_report(result, args.out):
            print(f"wrote: {path}", file=sys.stderr)
    _print(_render(result.table(), args.format, result_records(result)))
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest, "stats": cmd_stats, "train": cmd_train, "evaluate": cmd_evaluate,
    "classify": cmd_classify, "benchmark": cmd_benchmark, "report": cmd_report,
}


def _exit_code(exc):
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_RUNTIME


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or a usage error (1)
        return exc.code
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fakenews {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FakeNewsError, OSError) as exc:
        print(f"fakenews {args.command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
