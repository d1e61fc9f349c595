import csv

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fakenews import corpus as C
from fakenews.errors import (
    DatasetNotFound, EmptyCorpus, MalformedCsv, MissingColumn, UnknownLabel, UnlabeledDocument,
)
from fakenews.rng import Rng
from synth import make_corpus


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def labeled(labels):
    docs = tuple(C.Document(i, f"t{i}", f"body {i}", label=l) for i, l in enumerate(labels))
    return C.Corpus(docs)


class TestLoadCsv:
    def test_three_rows_in_order(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["title", "text", "label"],
                       [["a", "x", "REAL"], ["b", "y", "FAKE"], ["c", "z", "REAL"]])
        c = C.load_csv(p)
        assert [d.title for d in c] == ["a", "b", "c"]
        assert [d.raw_label for d in c] == ["REAL", "FAKE", "REAL"]
        assert c.ids == [0, 1, 2]

    def test_missing_label_column(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["title", "text"], [["a", "x"]])
        with pytest.raises(MissingColumn):
            C.load_csv(p)

    def test_not_found(self, tmp_path):
        with pytest.raises(DatasetNotFound):
            C.load_csv(tmp_path / "nope.csv")

    def test_wrong_field_count_names_row(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("title,text,label\na,b,REAL\nc,d\n")
        with pytest.raises(MalformedCsv, match="data row 2"):
            C.load_csv(p)

    def test_quoted_newlines_and_commas(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["", "title", "text", "label"],
                       [["0", "t, with comma", "line one\nline two", "FAKE"]])
        c = C.load_csv(p)
        assert len(c) == 1
        assert c[0].body == "line one\nline two"
        assert c[0].title == "t, with comma"

    def test_custom_columns(self, tmp_path):
        p = write_rows(tmp_path / "a.csv", ["headline", "article", "y"], [["h", "b", "1"]])
        c = C.load_csv(p, C.ColumnMapping("headline", "article", "y"))
        assert c[0].text == "h b"

    def test_row_count_matches_line_count(self, tmp_path):
        rows = [[f"t{i}", f"body {i}", "REAL" if i % 2 else "FAKE"] for i in range(250)]
        p = write_rows(tmp_path / "a.csv", ["title", "text", "label"], rows)
        # no embedded newlines, so a plain line count is an independent oracle
        n_lines = sum(1 for _ in open(p, encoding="utf-8"))
        assert len(C.load_csv(p)) == n_lines - 1

    def test_bom_header(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_bytes("﻿title,text,label\na,b,REAL\n".encode("utf-8"))
        assert len(C.load_csv(p)) == 1


class TestDropMissing:
    def test_no_missing_is_identity(self):
        c = labeled([1, 0, 1])
        c = C.Corpus(tuple(C.Document(d.id, d.title, d.body, raw_label="REAL") for d in c))
        assert C.drop_missing(c) == c

    def test_empty_bodies_dropped_in_order(self):
        bodies = ["a", "", "b", "   ", "c"]
        c = C.Corpus(tuple(C.Document(i, "", b, raw_label="FAKE") for i, b in enumerate(bodies)))
        out = C.drop_missing(c)
        assert out.ids == [0, 2, 4]
        assert len(c) == 5

    @settings(max_examples=30)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=100))
    def test_matches_scan_and_idempotent(self, blanks):
        docs = tuple(
            C.Document(i, "t", "" if nb else "body", raw_label=" " if nl else "REAL")
            for i, (nb, nl) in enumerate(blanks)
        )
        c = C.Corpus(docs)
        out = C.drop_missing(c)
        assert len(out) == sum(1 for nb, nl in blanks if not nb and not nl)
        assert C.drop_missing(out) == out


class TestEncodeLabels:
    def raw(self, labels):
        return C.Corpus(tuple(C.Document(i, "", "b", raw_label=l) for i, l in enumerate(labels)))

    def test_real_is_one(self):
        out = C.encode_labels(self.raw(["REAL", "FAKE", "REAL"]), {"REAL": 1, "FAKE": 0})
        assert out.labels == [1, 0, 1]

    def test_default_map_case_and_space(self):
        assert C.encode_labels(self.raw([" real", "Fake ", "1", "0"])).labels == [1, 0, 1, 0]

    def test_unknown_names_row(self):
        with pytest.raises(UnknownLabel) as info:
            C.encode_labels(self.raw(["REAL", "unknown"]))
        assert info.value.row == 2 and info.value.value == "unknown"
        assert "row 2" in str(info.value)


class TestSplit:
    def test_sizes_and_determinism(self):
        c = labeled([i % 2 for i in range(10)])
        tr, te = C.split(c, C.SplitSpec(0.2, 42))
        assert (len(tr), len(te)) == (8, 2)
        assert C.split(c, C.SplitSpec(0.2, 42))[1].ids == te.ids

    def test_pinned_test_ids(self):
        # frozen: the first two Fisher-Yates positions for seed 42 over 10 docs
        c = labeled([i % 2 for i in range(10)])
        perm = Rng(42).permutation(10).tolist()
        assert C.split(c)[1].ids == sorted(perm[:2])

    def test_round_half_up(self):
        assert C.n_test_docs(44898, 0.2) == 8980
        assert C.n_test_docs(6335, 0.2) == 1267
        assert C.n_test_docs(5, 0.5) == 3

    def test_seeds_differ(self):
        c = labeled([i % 2 for i in range(100)])
        assert C.split(c, C.SplitSpec(0.2, 42))[1].ids != C.split(c, C.SplitSpec(0.2, 43))[1].ids

    @given(st.integers(1, 80), st.floats(0.01, 0.99), st.integers(0, 10_000))
    def test_partition(self, n, frac, seed):
        c = labeled([i % 2 for i in range(n)])
        tr, te = C.split(c, C.SplitSpec(frac, seed))
        assert sorted(tr.ids + te.ids) == list(range(n))
        assert not set(tr.ids) & set(te.ids)
        assert len(te) == C.n_test_docs(n, frac)
        assert tr.ids == sorted(tr.ids) and te.ids == sorted(te.ids)

    def test_errors(self):
        with pytest.raises(EmptyCorpus):
            C.split(C.Corpus(()))
        with pytest.raises(UnlabeledDocument):
            C.split(C.Corpus((C.Document(0, "", "b"),)))
        with pytest.raises(ValueError):
            C.SplitSpec(1.0, 1)


class TestDistribution:
    def test_hand_count(self):
        assert C.label_distribution(labeled([1, 1, 0, 0])) == (2, 2)

    def test_generator_oracle(self):
        labels = [1] * 700 + [0] * 300
        c = make_corpus(1000, labels=labels, seed=4)
        assert C.label_distribution(c) == (700, 300)

    @given(st.lists(st.sampled_from([0, 1]), max_size=50))
    def test_counts_sum(self, labels):
        r, f = C.label_distribution(labeled(labels))
        assert r + f == len(labels) and r == sum(labels)

    def test_unlabeled(self):
        with pytest.raises(UnlabeledDocument):
            C.label_distribution(C.Corpus((C.Document(0, "", "b"),)))
