"""AdaBoost.R2 over regression trees.

Each round fits a tree to a weighted bootstrap resample, scores every
training sample by its absolute error relative to the round's largest error
(linear loss), and shifts weight toward the poorly predicted samples.  The
ensemble predicts the weighted median of its trees' outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DegenerateTargets, TooFewSamples, UntrainedModel
from ..features import FEATURE_NAMES, MOS_MAX, MOS_MIN, MosSample, QoeFeatures, feature_matrix
from .labels import ClassThresholds
from .tree import RegressionTree

LOSSES = ("linear", "square", "exponential")


@dataclass(frozen=True)
class AdtConfig:
    n_estimators: int = 10
    learning_rate: float = 0.1
    loss: str = "linear"
    max_tree_depth: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.max_tree_depth < 1:
            raise ValueError("max_tree_depth must be >= 1")


@dataclass
class TrainedModel:
    estimators: list[RegressionTree]
    estimator_log_weights: list[float]
    config: AdtConfig
    thresholds: ClassThresholds | None = None
    feature_names: tuple[str, ...] = FEATURE_NAMES
    training_mos_range: tuple[float, float] | None = field(default=None, compare=False)

    def raw_predict(self, x: np.ndarray) -> np.ndarray:
        """Weighted-median ensemble output before clamping to the MOS scale."""
        if not self.estimators:
            raise UntrainedModel("model has no estimators")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        preds = np.stack([t.predict(x) for t in self.estimators], axis=1)
        return weighted_median(preds, np.asarray(self.estimator_log_weights, dtype=np.float64))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.clip(self.raw_predict(x), MOS_MIN, MOS_MAX)


def weighted_median(preds: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row-wise lower weighted median of (n_samples, n_estimators) predictions."""
    order = np.argsort(preds, axis=1, kind="stable")
    cdf = np.cumsum(weights[order], axis=1)
    pick = (cdf >= 0.5 * cdf[:, -1:]).argmax(axis=1)
    rows = np.arange(len(preds))
    return preds[rows, order[rows, pick]]


def _relative_loss(err: np.ndarray, loss: str) -> np.ndarray:
    rel = err / err.max()
    if loss == "square":
        return rel**2
    if loss == "exponential":
        return 1.0 - np.exp(-rel)
    return rel


def fit_arrays(x: np.ndarray, y: np.ndarray, config: AdtConfig | None = None) -> TrainedModel:
    config = config or AdtConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    if np.all(y == y[0]):
        raise DegenerateTargets("all MOS targets are identical")
    rng = np.random.default_rng(config.rng_seed)
    w = np.full(n, 1.0 / n)
    trees, log_weights = [], []
    for _ in range(config.n_estimators):
        idx = rng.choice(n, size=n, replace=True, p=w)
        tree = RegressionTree().fit(x[idx], y[idx], config.max_tree_depth)
        err = np.abs(y - tree.predict(x))
        if err.max() <= 0.0:
            # a perfect round ends boosting
            trees.append(tree)
            log_weights.append(1.0)
            break
        loss = _relative_loss(err, config.loss)
        avg_loss = float(np.dot(w, loss))
        if avg_loss >= 0.5:
            if not trees:
                trees.append(tree)
                log_weights.append(1.0)
            break
        beta = avg_loss / (1.0 - avg_loss)
        trees.append(tree)
        log_weights.append(config.learning_rate * np.log(1.0 / beta))
        w = w * beta ** (config.learning_rate * (1.0 - loss))
        w /= w.sum()
    return TrainedModel(trees, log_weights, config, training_mos_range=(float(y.min()), float(y.max())))


def train_adaboost_r2(samples: Sequence[MosSample], config: AdtConfig | None = None) -> TrainedModel:
    """Fit an ensemble on labelled samples; class thresholds are left unset."""
    if len(samples) < 2:
        raise TooFewSamples(f"need at least 2 samples, got {len(samples)}")
    x, y = feature_matrix(samples)
    return fit_arrays(x, y, config)


def predict_mos(model: TrainedModel, features: QoeFeatures | Sequence[QoeFeatures]) -> float | np.ndarray:
    if model is None or not getattr(model, "estimators", None):
        raise UntrainedModel("model is not trained")
    if isinstance(features, QoeFeatures):
        return float(model.predict(features.as_array()[None])[0])
    return model.predict(np.array([f.as_array() for f in features]))
