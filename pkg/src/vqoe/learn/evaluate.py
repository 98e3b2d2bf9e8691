"""Cross-validated evaluation and feature importance."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import TooFewSamples, UntrainedModel
from ..features import FEATURE_NAMES, MosSample, feature_matrix
from .boost import AdtConfig, TrainedModel, fit_arrays
from .labels import LABELS, ClassThresholds, search_thresholds

REPORT_SCHEMA_VERSION = 1


@dataclass
class EvalReport:
    micro_precision: float
    micro_accuracy: float
    micro_recall: float
    mse: float
    confusion: list[list[int]]
    feature_importance: list[float]
    n_samples: int = 0
    folds: int = 0
    fold_thresholds: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["schema_version"] = REPORT_SCHEMA_VERSION
        d["labels"] = list(LABELS)
        d["feature_names"] = list(FEATURE_NAMES)
        d["fold_thresholds"] = [list(t) for t in self.fold_thresholds]
        return d


def feature_importance(model: TrainedModel) -> np.ndarray:
    """Estimator-weighted mean of per-tree normalised variance reductions.

    A model made only of leaves has no splits to credit and returns zeros.
    """
    if model is None or not model.estimators:
        raise UntrainedModel("model is not trained")
    total = np.zeros(len(model.feature_names))
    for tree, w in zip(model.estimators, model.estimator_log_weights):
        imp = tree.raw_importances()
        s = imp.sum()
        if s > 0:
            total += w * imp / s
    s = total.sum()
    return total / s if s > 0 else total


def micro_scores(confusion: np.ndarray) -> tuple[float, float, float]:
    """Micro precision, recall and accuracy (percent) from a 3x3 count matrix.

    Rows are true labels, columns predicted.  Pooled over classes,
    TP + FP and TP + FN both equal the sample count.
    """
    confusion = np.asarray(confusion)
    tp = int(np.trace(confusion))
    fp = int(confusion.sum(axis=0).sum() - tp)
    fn = int(confusion.sum(axis=1).sum() - tp)
    n = int(confusion.sum())
    precision = 100.0 * tp / (tp + fp)
    recall = 100.0 * tp / (tp + fn)
    accuracy = 100.0 * tp / n
    return precision, recall, accuracy


def confusion_matrix(true_cls, pred_cls) -> np.ndarray:
    m = np.zeros((3, 3), dtype=np.int64)
    np.add.at(m, (np.asarray(true_cls), np.asarray(pred_cls)), 1)
    return m


def evaluate_model(model: TrainedModel, samples: Sequence[MosSample]) -> EvalReport:
    """Score a trained model (with thresholds) on labelled samples."""
    if model.thresholds is None:
        raise UntrainedModel("model has no class thresholds")
    x, y = feature_matrix(samples)
    pred = model.predict(x)
    conf = confusion_matrix(model.thresholds.classify(y), model.thresholds.classify(pred))
    p, r, a = micro_scores(conf)
    return EvalReport(
        p, a, r, float(np.mean((pred - y) ** 2)), conf.tolist(),
        feature_importance(model).tolist(), len(y), 0,
        [(model.thresholds.m1, model.thresholds.m2)],
    )


def fit_with_thresholds(x, y, config: AdtConfig) -> TrainedModel:
    """Train, then choose class thresholds from the model's own training fit."""
    model = fit_arrays(x, y, config)
    model.thresholds = search_thresholds(y, model.predict(x))
    return model


def kfold_cv(samples: Sequence[MosSample], config: AdtConfig | None = None, k: int = 10) -> EvalReport:
    """Pooled k-fold evaluation.

    Samples are shuffled with ``config.rng_seed``.  Each fold's thresholds
    come from the training part only; held-out predictions are labelled with
    them and the counts pooled across folds.
    """
    config = config or AdtConfig()
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if len(samples) < k:
        raise TooFewSamples(f"{len(samples)} samples cannot fill {k} folds")
    x, y = feature_matrix(samples)
    perm = np.random.default_rng(config.rng_seed).permutation(len(y))
    folds = np.array_split(perm, k)
    conf = np.zeros((3, 3), dtype=np.int64)
    sq_err = 0.0
    importances = []
    fold_th = []
    for i, test in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model = fit_with_thresholds(x[train], y[train], config)
        th: ClassThresholds = model.thresholds
        pred = model.predict(x[test])
        conf += confusion_matrix(th.classify(y[test]), th.classify(pred))
        sq_err += float(((pred - y[test]) ** 2).sum())
        importances.append(feature_importance(model))
        fold_th.append((th.m1, th.m2))
    p, r, a = micro_scores(conf)
    imp = np.mean(importances, axis=0)
    if imp.sum() > 0:
        imp = imp / imp.sum()
    return EvalReport(p, a, r, sq_err / len(y), conf.tolist(), imp.tolist(), len(y), k, fold_th)


def format_table(rows: dict[str, EvalReport]) -> str:
    """Aligned text table: model, precision, accuracy, recall (%) and MSE."""
    head = f"{'Model':<8} {'Precision (%)':>14} {'Accuracy (%)':>13} {'Recall (%)':>11} {'MSE':>6}"
    lines = [head, "-" * len(head)]
    for name, r in rows.items():
        lines.append(
            f"{name:<8} {r.micro_precision:>14.2f} {r.micro_accuracy:>13.2f} "
            f"{r.micro_recall:>11.2f} {r.mse:>6.2f}"
        )
    return "\n".join(lines)
