"""Confusion counts, the four summary metrics, and multi-model comparison.

The positive class is real news (label 1). Precision, recall and F1 are
defined as 0 when their denominator is 0, so a degenerate model still gets a
row in the comparison table.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .errors import EmptyInput, EmptyMatrix, LengthMismatch

METRICS = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def transpose(self):
        """Counts with truth and prediction swapped."""
        return ConfusionMatrix(self.tp, self.fn, self.fp, self.tn)


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: ConfusionMatrix
    wall_time: float = 0.0

    def as_record(self):
        """Deterministic fields only (no timing)."""
        rec = {"model": self.model_name}
        rec.update({m: getattr(self, m) for m in METRICS})
        rec.update(asdict(self.confusion))
        rec["n_test"] = self.confusion.total
        return rec


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true, y_pred = list(y_true), list(y_pred)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise EmptyInput("no labels to compare")
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        t, p = int(t), int(p)
        if t not in (0, 1) or p not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got ({t}, {p})")
        if t == 1:
            if p == 1:
                tp += 1
            else:
                fn += 1
        elif p == 1:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _ratio(num, den):
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix, model_name="", wall_time=0.0) -> MetricsReport:
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no entries")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return MetricsReport(
        model_name,
        (cm.tp + cm.tn) / cm.total,
        precision,
        recall,
        f1,
        cm,
        wall_time,
    )


def evaluate(model_name, y_true, y_pred, wall_time=0.0) -> MetricsReport:
    return metrics(confusion(y_true, y_pred), model_name, wall_time)


@dataclass
class ComparisonTable:
    """Reports sorted by accuracy (descending, ties by name) with per-metric winners."""

    rows: list
    best: dict = field(default_factory=dict)

    def is_best(self, row, metric):
        return row.model_name in self.best[metric]

    def render_text(self, with_time=False):
        name_w = max(len("Model"), *(len(r.model_name) for r in self.rows))
        cols = ["Accuracy", "Precision", "Recall", "f1-score"]
        head = f"{'Model':<{name_w}}  " + "  ".join(f"{c:>10}" for c in cols)
        if with_time:
            head += f"  {'time (s)':>9}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            cells = []
            for m in METRICS:
                mark = "*" if self.is_best(r, m) else " "
                cells.append(f"{pct(getattr(r, m)):>9}{mark}")
            line = f"{r.model_name:<{name_w}}  " + "  ".join(cells)
            if with_time:
                line += f"  {r.wall_time:>9.2f}"
            lines.append(line)
        lines.append("(* best per column)")
        return "\n".join(lines) + "\n"

    def render_markdown(self):
        lines = [
            "| Model | Accuracy | Precision | Recall | f1-score |",
            "|---|---|---|---|---|",
        ]
        for r in self.rows:
            cells = []
            for m in METRICS:
                v = pct(getattr(r, m))
                cells.append(f"**{v}**" if self.is_best(r, m) else v)
            lines.append(f"| {r.model_name} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def records(self):
        out = []
        for rank, r in enumerate(self.rows, 1):
            rec = r.as_record()
            rec["rank"] = rank
            rec["best"] = [m for m in METRICS if self.is_best(r, m)]
            out.append(rec)
        return out


def pct(x):
    """Fraction rendered as a percentage with 2 decimals, e.g. 0.9369 -> '93.69%'."""
    return f"{100.0 * x:.2f}%"


def compare(reports) -> ComparisonTable:
    reports = list(reports)
    rows = sorted(reports, key=lambda r: (-r.accuracy, r.model_name))
    best = {}
    for m in METRICS:
        top = max(getattr(r, m) for r in rows) if rows else 0.0
        best[m] = {r.model_name for r in rows if getattr(r, m) == top}
    return ComparisonTable(rows, best)
