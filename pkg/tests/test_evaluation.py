import pytest
from hypothesis import given
from hypothesis import strategies as st

from fakenews.errors import EmptyInput, EmptyMatrix, LengthMismatch
from fakenews.evaluation import (
    METRICS, ConfusionMatrix, MetricsReport, compare, confusion, evaluate, metrics, pct,
)

# published accuracy / precision / recall / f1 per configuration, in percent
PUBLISHED = {
    "Logistic Regression": (91.55, 93.32, 89.67, 91.46),
    "Random Forest": (90.29, 89.57, 91.39, 90.47),
    "SVM": (93.29, 94.39, 92.18, 93.27),
    "Neural Networks": (93.69, 93.88, 93.58, 93.73),
    "Neural Networks with Regularisation and Dropouts Implemented": (92.82, 92.81, 92.96, 92.89),
}

cms = st.builds(ConfusionMatrix, *[st.integers(0, 500)] * 4).filter(lambda c: c.total > 0)
label_pairs = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200)


def report(name, acc):
    return MetricsReport(name, acc, acc, acc, acc, ConfusionMatrix(1, 0, 0, 0))


class TestConfusion:
    def test_perfect(self):
        assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionMatrix(tp=2, fp=0, fn=0, tn=1)

    def test_complement(self):
        cm = confusion([1, 0, 1, 0], [0, 1, 0, 1])
        assert cm.tp == cm.tn == 0

    def test_hand_count(self):
        cm = confusion([1, 1, 1, 1, 1, 0, 0, 0, 0, 0], [1, 1, 1, 0, 0, 1, 0, 0, 0, 0])
        assert (cm.tp, cm.fn, cm.fp, cm.tn) == (3, 2, 1, 4)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            confusion([1, 0], [1])
        with pytest.raises(EmptyInput):
            confusion([], [])
        with pytest.raises(EmptyMatrix):
            metrics(ConfusionMatrix())

    @given(label_pairs)
    def test_swap_transposes(self, pairs):
        t, p = zip(*pairs)
        a, b = confusion(t, p), confusion(p, t)
        assert b == a.transpose()
        assert (b.fp, b.fn) == (a.fn, a.fp)
        assert metrics(a).accuracy == metrics(b).accuracy
        assert a.total == len(pairs)


class TestMetrics:
    def test_hand_example(self):
        r = metrics(ConfusionMatrix(tp=3, fp=1, fn=2, tn=4))
        assert r.accuracy == pytest.approx(0.7, abs=1e-12)
        assert r.precision == 0.75 and r.recall == 0.6
        assert round(r.f1, 4) == 0.6667

    def test_perfect(self):
        r = evaluate("m", [1, 0, 1, 0], [1, 0, 1, 0])
        assert (r.accuracy, r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0, 1.0)

    def test_zero_denominator(self):
        r = metrics(ConfusionMatrix(tp=0, fp=0, fn=3, tn=2))
        assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0

    @given(cms)
    def test_identities(self, cm):
        r = metrics(cm)
        for m in METRICS:
            assert 0.0 <= getattr(r, m) <= 1.0
        assert r.accuracy == (cm.tp + cm.tn) / (cm.tp + cm.fp + cm.fn + cm.tn)
        if r.precision + r.recall > 0:
            hm = 2 * r.precision * r.recall / (r.precision + r.recall)
            assert abs(r.f1 - hm) <= 1e-12

    def test_record_has_no_timing(self):
        rec = evaluate("m", [1, 0], [1, 1], wall_time=3.2).as_record()
        assert "wall_time" not in rec and rec["n_test"] == 2


class TestCompare:
    def test_published_rows_order(self):
        rows = [MetricsReport(n, *(v / 100 for v in vals), ConfusionMatrix(1, 0, 0, 0))
                for n, vals in PUBLISHED.items()]
        table = compare(rows)
        assert [r.model_name for r in table.rows[:2]] == ["Neural Networks", "SVM"]
        assert table.best["accuracy"] == {"Neural Networks"}
        assert table.best["precision"] == {"SVM"}
        md = table.render_markdown()
        assert md.splitlines()[0] == "| Model | Accuracy | Precision | Recall | f1-score |"
        assert "| Neural Networks | **93.69%** | 93.88% | **93.58%** | **93.73%** |" in md

    def test_single_row_all_best(self):
        t = compare([report("only", 0.5)])
        assert len(t.rows) == 1
        assert all(t.is_best(t.rows[0], m) for m in METRICS)

    def test_ties_alphabetical(self):
        t = compare([report("b", 0.9), report("a", 0.9), report("c", 0.95)])
        assert [r.model_name for r in t.rows] == ["c", "a", "b"]
        assert [r["rank"] for r in t.records()] == [1, 2, 3]

    def test_pct(self):
        assert pct(0.9369) == "93.69%"
        assert pct(1.0) == "100.00%"
