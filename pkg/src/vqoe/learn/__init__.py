"""MOS regression with AdaBoost.R2 trees and 3-class QoE labelling."""

from .boost import AdtConfig, TrainedModel, fit_arrays, predict_mos, train_adaboost_r2, weighted_median
from .evaluate import EvalReport, evaluate_model, feature_importance, fit_with_thresholds, format_table, kfold_cv
from .labels import LABELS, ClassThresholds, search_thresholds
from .persist import load_model, save_model
from .tree import RegressionTree

__all__ = [
    "AdtConfig",
    "ClassThresholds",
    "EvalReport",
    "LABELS",
    "RegressionTree",
    "TrainedModel",
    "evaluate_model",
    "feature_importance",
    "fit_arrays",
    "fit_with_thresholds",
    "format_table",
    "kfold_cv",
    "load_model",
    "predict_mos",
    "save_model",
    "search_thresholds",
    "train_adaboost_r2",
    "weighted_median",
]
