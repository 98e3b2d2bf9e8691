"""JSON model files.

Floats are written with ``repr`` precision by :mod:`json`, so a save/load
cycle reproduces every split value, leaf value and weight exactly.
"""

from __future__ import annotations

import json
import os

from ..errors import CorruptModel, SchemaVersionMismatch, UntrainedModel
from .boost import AdtConfig, TrainedModel
from .labels import ClassThresholds
from .tree import LEAF, Node, RegressionTree

MODEL_SCHEMA_VERSION = 1


def model_to_dict(model: TrainedModel) -> dict:
    if not model.estimators:
        raise UntrainedModel("refusing to save an untrained model")
    th = model.thresholds
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "config": {
            "n_estimators": model.config.n_estimators,
            "learning_rate": model.config.learning_rate,
            "loss": model.config.loss,
            "max_tree_depth": model.config.max_tree_depth,
            "rng_seed": model.config.rng_seed,
        },
        "feature_names": list(model.feature_names),
        "trees": [
            {
                "nodes": [
                    {
                        "feature_idx": n.feature_idx,
                        "split_value": n.split_value,
                        "left": n.left,
                        "right": n.right,
                        "leaf_value": n.leaf_value,
                        "n_samples": n.n_samples,
                        "impurity": n.impurity,
                    }
                    for n in t.nodes
                ]
            }
            for t in model.estimators
        ],
        "log_weights": [float(w) for w in model.estimator_log_weights],
        "thresholds": None if th is None else {"m1": th.m1, "m2": th.m2},
    }


def _tree_from_dict(d: dict, n_features: int) -> RegressionTree:
    nodes = [
        Node(
            int(n["feature_idx"]),
            float(n["split_value"]),
            int(n["left"]),
            int(n["right"]),
            float(n["leaf_value"]),
            int(n["n_samples"]),
            float(n["impurity"]),
        )
        for n in d["nodes"]
    ]
    if not nodes:
        raise CorruptModel("tree with no nodes")
    for i, n in enumerate(nodes):
        if n.feature_idx == LEAF:
            continue
        if not 0 <= n.feature_idx < n_features:
            raise CorruptModel(f"node {i} splits on unknown feature {n.feature_idx}")
        if not (i < n.left < len(nodes) and i < n.right < len(nodes)):
            raise CorruptModel(f"node {i} has invalid children")
    return RegressionTree(nodes, n_features)


def model_from_dict(d: dict) -> TrainedModel:
    if not isinstance(d, dict) or "schema_version" not in d:
        raise CorruptModel("model file has no schema_version")
    if d["schema_version"] != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"model schema {d['schema_version']!r}, this build reads {MODEL_SCHEMA_VERSION}"
        )
    try:
        names = tuple(d["feature_names"])
        trees = [_tree_from_dict(t, len(names)) for t in d["trees"]]
        weights = [float(w) for w in d["log_weights"]]
        config = AdtConfig(**d["config"])
        th = d["thresholds"]
        thresholds = None if th is None else ClassThresholds(float(th["m1"]), float(th["m2"]))
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptModel(f"malformed model: {e}") from None
    if len(trees) != len(weights) or not trees:
        raise CorruptModel("trees and log_weights disagree in length")
    return TrainedModel(trees, weights, config, thresholds, names)


def save_model(model: TrainedModel, path) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_model(path) -> TrainedModel:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as e:
        raise CorruptModel(f"{path}: not valid JSON ({e})") from None
    except OSError as e:
        raise CorruptModel(f"{path}: cannot read model ({e})") from None
    return model_from_dict(d)
