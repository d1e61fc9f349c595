"""Write benchmark outputs: markdown table, JSONL records, charts.

Files written to the output directory:

``comparison.md``     markdown table, one row per model, best value per column in bold
``results.jsonl``     one JSON object per model, in table order
``summary.json``      dataset counts, split sizes, vocabulary size, config snapshot
``timings.json``      wall-clock seconds per stage (the only non-deterministic file)
``distribution.csv`` / ``distribution.svg``  real vs fake document counts
``comparison.csv`` / ``comparison.svg``      grouped bars, four metrics per model

``results.jsonl`` fields: ``rank`` (1 = highest accuracy), ``kind`` (config
name), ``model`` (display name), ``accuracy``, ``precision``, ``recall``,
``f1`` (fractions in [0, 1], positive class = real), ``tp``, ``fp``, ``fn``,
``tn``, ``n_test``, ``best`` (metrics on which this model ranks first).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import DataError
from .evaluation import METRICS, pct

_METRIC_LABELS = {"accuracy": "Accuracy", "precision": "Precision", "recall": "Recall",
                  "f1": "f1-score"}
_COLORS = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"]


def _dump(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None
    return Path(path)


def result_records(result):
    table = result.table()
    kind_of = {r.model_name: k for k, r in result.reports.items()}
    out = []
    for rec in table.records():
        rec = {"rank": rec.pop("rank"), "kind": kind_of[rec["model"]], **rec}
        out.append(rec)
    return out


def markdown(result):
    ds = result.dataset
    lines = [
        "# Model comparison",
        "",
        result.table().render_markdown().rstrip("\n"),
        "",
        f"Test split: {result.split_sizes['test']} documents; "
        f"trained on {result.split_sizes['train_used']} of {result.split_sizes['train']} "
        f"training documents; vocabulary {result.vocabulary_size} terms.",
        f"Dataset: {ds.rows} rows, {ds.dropped} dropped for missing values, "
        f"{ds.real} real / {ds.fake} fake.",
        "Precision, recall and f1-score treat real news (label 1) as the positive class.",
    ]
    if result.failures:
        lines.append("")
        lines.append("Failed models: " + ", ".join(sorted(result.failures)))
    return "\n".join(lines) + "\n"


def _bar_svg(title, groups, series, values, y_max, fmt):
    """Grouped vertical bars. values[g][s] is the bar for group g, series s."""
    width, height = 120 + 150 * len(groups), 380
    left, top, bottom = 60, 50, 110
    plot_h = height - top - bottom
    group_w = (width - left - 20) / max(1, len(groups))
    bar_w = group_w * 0.8 / max(1, len(series))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{width - 20}" y2="{top + plot_h}" '
        'stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for tick in range(5):
        v = y_max * tick / 4
        y = top + plot_h - plot_h * tick / 4
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{escape(fmt(v))}</text>')
    for g, name in enumerate(groups):
        x0 = left + g * group_w + group_w * 0.1
        for s in range(len(series)):
            v = values[g][s]
            h = 0.0 if y_max <= 0 else plot_h * v / y_max
            x = x0 + s * bar_w
            out.append(
                f'<rect x="{x:.1f}" y="{top + plot_h - h:.1f}" width="{bar_w * 0.9:.1f}" '
                f'height="{h:.1f}" fill="{_COLORS[s % len(_COLORS)]}">'
                f'<title>{escape(name)} {escape(series[s])}: {escape(fmt(v))}</title></rect>'
            )
        cx = left + g * group_w + group_w / 2
        label = name if len(name) <= 24 else name[:22] + "..."
        out.append(f'<text x="{cx:.1f}" y="{top + plot_h + 16}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{escape(label)}</text>')
    if len(series) > 1:
        for s, name in enumerate(series):
            x = left + s * 110
            y = height - 30
            out.append(f'<rect x="{x}" y="{y - 10}" width="12" height="12" '
                       f'fill="{_COLORS[s % len(_COLORS)]}"/>')
            out.append(f'<text x="{x + 16}" y="{y}" font-family="sans-serif" '
                       f'font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def distribution_svg(real, fake):
    top = max(real, fake, 1)
    return _bar_svg("Distribution of real vs fake news", ["Real", "Fake"], ["documents"],
                    [[real], [fake]], top, lambda v: f"{v:.0f}")


def comparison_svg(result):
    rows = result.table().rows
    return _bar_svg(
        "Model comparison (test split)",
        [r.model_name for r in rows],
        [_METRIC_LABELS[m] for m in METRICS],
        [[getattr(r, m) for m in METRICS] for r in rows],
        1.0,
        pct,
    )


def _csv_text(rows):
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def emit_report(result, out_dir):
    """Write every report file into ``out_dir`` (created if needed); return paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from None

    records = result_records(result)
    ds = result.dataset
    total = max(1, ds.real + ds.fake)
    written = [
        _dump(out / "comparison.md", markdown(result)),
        _dump(out / "results.jsonl", "".join(json.dumps(r) + "\n" for r in records)),
        _dump(out / "summary.json", json.dumps(result.summary(), indent=2, sort_keys=True) + "\n"),
        _dump(out / "timings.json", json.dumps(result.timings, indent=2, sort_keys=True) + "\n"),
        _dump(out / "distribution.csv", _csv_text([
            ["label", "count", "percent"],
            ["real", ds.real, f"{100 * ds.real / total:.2f}"],
            ["fake", ds.fake, f"{100 * ds.fake / total:.2f}"],
        ])),
        _dump(out / "distribution.svg", distribution_svg(ds.real, ds.fake)),
        _dump(out / "comparison.csv", _csv_text(
            [["model", *[_METRIC_LABELS[m] for m in METRICS]]]
            + [[r["model"], *[f"{100 * r[m]:.2f}" for m in METRICS]] for r in records]
        )),
        _dump(out / "comparison.svg", comparison_svg(result)),
    ]
    return written
