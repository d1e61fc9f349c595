import numpy as np
import pytest

from fakenews import vectorize
from fakenews.forest import ForestHyper
from fakenews.linear import TrainHyper
from fakenews.models import KINDS
from fakenews.neural import MlpHyper
from synth import make_corpus, write_csv

FAST_HYPER = {
    "logreg": TrainHyper(epochs=5),
    "svm": TrainHyper(epochs=5),
    "forest": ForestHyper(n_trees=7, max_depth=8),
    "mlp-baseline": MlpHyper(hidden_dims=(8,), epochs=2),
    "mlp-regularized": MlpHyper(hidden_dims=(8,), epochs=2, dropout_rate=0.5, lam=1e-4),
}

FAST_CONFIG = """\
[data]
path = {path}
[run]
output_dir = {out}
[logreg]
epochs = 5
[svm]
epochs = 5
[forest]
n_trees = 7
max_depth = 8
[mlp-baseline]
hidden_dims = 8
epochs = 2
[mlp-regularized]
hidden_dims = 8
epochs = 2
"""


@pytest.fixture(scope="session")
def trained():
    """TF-IDF model, train matrix, labels and one fitted model per kind."""
    corpus = make_corpus(300, vocab=800, mean_len=40, seed=21)
    tfidf, vecs = vectorize.fit_transform(corpus)
    X = vectorize.to_csr(vecs, tfidf.dim)
    y = np.asarray(corpus.labels)
    models = {k: KINDS[k].train(X, y, FAST_HYPER[k]) for k in KINDS}
    return tfidf, X, y, models


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "news.csv"
    write_csv(make_corpus(200, vocab=600, mean_len=40, seed=8), path)
    return path


@pytest.fixture
def fast_config(tmp_path, dataset):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(FAST_CONFIG.format(path=dataset, out=tmp_path / "out"))
    return cfg


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE = {}


def _record(item, rep):
    number, title = item.get_closest_marker("criterion").args
    status = "PASS" if rep.passed else ("BLOCKED" if rep.skipped else "FAIL")
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    if rep.skipped and isinstance(rep.longrepr, tuple):
        detail = rep.longrepr[2].removeprefix("Skipped: ")
    elif rep.failed and rep.longrepr is not None:
        crash = getattr(rep.longrepr, "reprcrash", None)
        msg = crash.message.splitlines()[0] if crash else "error"
        detail = f"{msg}; {detail}" if detail else msg
    ACCEPTANCE[number] = (title, status, detail)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    """Tests marked ``criterion(number, title)`` feed the acceptance summary."""
    rep = yield
    if item.get_closest_marker("criterion") is not None:
        if rep.when == "call" or (rep.when == "setup" and not rep.passed):
            _record(item, rep)
    return rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, status, detail = ACCEPTANCE[number]
        line = f"AC{number:<2} {status:<7} {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
