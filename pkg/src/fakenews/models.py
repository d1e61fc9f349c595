"""One entry per trainable configuration: how to train it and how to score."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import forest, linear, neural


@dataclass(frozen=True)
class ModelKind:
    name: str           # CLI / config name
    display: str        # comparison-table row name
    family: str         # artifact payload type: linear | forest | mlp
    score_name: str     # what the per-input score means
    train: Callable
    predict_many: Callable  # (model, X) -> (labels, scores)


def _linear_scores(model, X):
    s = linear.decisions(model, X)
    labels = linear.labels_from_scores(model, s)
    if model.loss_kind == "log":
        return labels, np.array([linear.sigmoid(v) for v in s])
    return labels, s


KINDS = {
    k.name: k
    for k in (
        ModelKind("logreg", "Logistic Regression", "linear", "probability",
                  linear.train_logreg, _linear_scores),
        ModelKind("svm", "SVM", "linear", "decision",
                  linear.train_svm, _linear_scores),
        ModelKind("forest", "Random Forest", "forest", "vote_fraction",
                  lambda X, y, h: forest.train_forest(X, y, h), forest.predict_forest_many),
        ModelKind("mlp-baseline", "Neural Networks", "mlp", "probability",
                  neural.train_mlp, neural.predict_mlp_many),
        ModelKind("mlp-regularized",
                  "Neural Networks with Regularisation and Dropouts Implemented",
                  "mlp", "probability", neural.train_mlp, neural.predict_mlp_many),
    )
}


def predict_one(kind, model, x):
    """(label, score) for a single SparseVector."""
    labels, scores = KINDS[kind].predict_many(model, [x])
    return int(labels[0]), float(scores[0])
