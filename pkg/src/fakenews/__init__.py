"""Fake-news text classification toolkit.

Corpus ingestion, TF-IDF vectorization, four classifier families (logistic
regression, linear SVM, random forest, multilayer perceptron) and a
benchmark harness that compares them on a held-out split.
"""

from .config import RunConfig, load_config, parse_config
from .corpus import FAKE, REAL, ColumnMapping, Corpus, Document, SplitSpec, load_csv
from .errors import DataError, FakeNewsError, ModelError
from .harness import BenchmarkResult, run_benchmark

__version__ = "0.1.0"

__all__ = [
    "REAL", "FAKE", "ColumnMapping", "Corpus", "Document", "SplitSpec", "load_csv",
    "RunConfig", "load_config", "parse_config", "run_benchmark", "BenchmarkResult",
    "FakeNewsError", "DataError", "ModelError",
]
