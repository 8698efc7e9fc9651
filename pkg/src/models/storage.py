# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Model files: versioned JSON documents holding the config snapshot, features and trees.

The layout is described in docs/reference/model-file.md. Floats are written with their shortest
exact representation, so a loaded model predicts bit-identically to the saved one.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Union

from jsonschema import exceptions, validate

from constants import MODEL_FORMAT, MODEL_FORMAT_VERSION
from models.ensembles import ALGORITHMS, EnsembleModel, ModelError, TrainConfig
from models.tree import TreeNode

logger = logging.getLogger(__name__)

MODEL_JSON_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "clickbait ensemble model file",
    "description": "A trained tree ensemble together with the configuration that produced it.",
    "type": "object",
    "definitions": {
        "node": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"leaf": {"type": "number"}},
                    "required": ["leaf"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "feature": {"type": "string"},
                        "threshold": {"type": "number"},
                        "left": {"$ref": "#/definitions/node"},
                        "right": {"$ref": "#/definitions/node"},
                    },
                    "required": ["feature", "threshold", "left", "right"],
                    "additionalProperties": False,
                },
            ]
        }
    },
    "properties": {
        "format": {"const": MODEL_FORMAT},
        "version": {"type": "integer"},
        "algorithm": {"enum": list(ALGORITHMS)},
        "config": {"type": "object"},
        "run_config": {"type": "object"},
        "feature_subset": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "base_score": {"type": "number"},
        "train_loss": {"type": "array", "items": {"type": "number"}},
        "trees": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "weight": {"type": "number"},
                    "root": {"$ref": "#/definitions/node"},
                },
                "required": ["weight", "root"],
                "additionalProperties": False,
            },
        },
    },
    "required": [
        "format",
        "version",
        "algorithm",
        "config",
        "feature_subset",
        "base_score",
        "train_loss",
        "trees",
    ],
}


class ModelLoadError(ModelError):
    """Exception raised when a model file cannot be read, parsed or understood."""


def _node_to_dict(node: TreeNode) -> Dict:
    if node.is_leaf:
        return {"leaf": node.score}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(node: Dict, feature_index: Dict[str, int]) -> TreeNode:
    if "leaf" in node:
        return TreeNode(score=float(node["leaf"]))
    if node["feature"] not in feature_index:
        raise ModelLoadError(f"tree splits on {node['feature']!r}, outside the feature subset")
    return TreeNode(
        feature=node["feature"],
        feature_index=feature_index[node["feature"]],
        threshold=float(node["threshold"]),
        left=_node_from_dict(node["left"], feature_index),
        right=_node_from_dict(node["right"], feature_index),
    )


def model_to_dict(model: EnsembleModel, run_config: Optional[Dict] = None) -> Dict:
    """Document form of a model, optionally recording the run that trained it."""
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "algorithm": model.algorithm,
        "config": model.config.as_dict(),
        "feature_subset": list(model.feature_subset),
        "base_score": model.base_score,
        "train_loss": list(model.train_loss),
        "trees": [{"weight": weight, "root": _node_to_dict(tree)} for tree, weight in model.trees],
    }
    if run_config is not None:
        document["run_config"] = run_config
    return document


def model_from_dict(document: Dict) -> EnsembleModel:
    """Rebuilds a model from its document form.

    Raises:
        ModelLoadError: when the document does not describe a model of the supported version.
    """
    try:
        validate(instance=document, schema=MODEL_JSON_SCHEMA)
    except exceptions.ValidationError as err:
        raise ModelLoadError(f"invalid model document: {err.message}")
    if document["version"] != MODEL_FORMAT_VERSION:
        raise ModelLoadError(
            f"model format version {document['version']} is not supported, "
            f"expected {MODEL_FORMAT_VERSION}"
        )

    try:
        config = TrainConfig.from_dict(document["config"])
    except TypeError as err:
        raise ModelLoadError(f"invalid training config: {err}")
    feature_index = {name: index for index, name in enumerate(document["feature_subset"])}
    trees = tuple(
        (_node_from_dict(entry["root"], feature_index), float(entry["weight"]))
        for entry in document["trees"]
    )
    return EnsembleModel(
        algorithm=document["algorithm"],
        trees=trees,
        base_score=float(document["base_score"]),
        feature_subset=tuple(document["feature_subset"]),
        config=config,
        train_loss=tuple(float(loss) for loss in document["train_loss"]),
    )


def save_model(
    model: EnsembleModel, path: Union[str, Path], run_config: Optional[Dict] = None
) -> None:
    """Writes a model file.

    Raises:
        ModelError: when the file cannot be written.
    """
    text = json.dumps(model_to_dict(model, run_config), indent=1, sort_keys=True, allow_nan=False)
    try:
        with open(path, "w", encoding="utf-8") as file:
            file.write(text)
            file.write("\n")
    except OSError as err:
        raise ModelError(f"unable to write model file {path!r}: {err}")
    logger.info(f"saved {model.algorithm} model with {len(model.trees)} trees to {path}")


def load_model(path: Union[str, Path]) -> EnsembleModel:
    """Reads a model file.

    Raises:
        ModelLoadError: when the file is unreadable, truncated, or of another format or version.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            document = json.load(file)
    except (OSError, UnicodeDecodeError) as err:
        raise ModelLoadError(f"unable to read model file {path!r}: {err}")
    except json.JSONDecodeError as err:
        raise ModelLoadError(f"corrupt model file {path}: {err.msg}")
    model = model_from_dict(document)
    logger.info(f"loaded {model.algorithm} model with {len(model.trees)} trees from {path}")
    return model
