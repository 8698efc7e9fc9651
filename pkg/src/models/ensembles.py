# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Tree ensemble classifiers: a single CART tree, a random forest, AdaBoost and gradient boosting.

Every model maps a feature vector to a clickbait probability in [0, 1].
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import expit

from matrix import FeatureMatrix, FeatureVector
from models.tree import TreeBuilder, TreeNode

logger = logging.getLogger(__name__)

DECISION_TREE = "decision_tree"
RANDOM_FOREST = "random_forest"
ADABOOST = "adaboost"
GRADIENT_BOOSTING = "gradient_boosting"
ALGORITHMS = (DECISION_TREE, RANDOM_FOREST, ADABOOST, GRADIENT_BOOSTING)

# Depth and size used when a TrainConfig leaves them unset.
ALGORITHM_DEFAULTS = {
    DECISION_TREE: {"max_depth": 8, "n_trees": 1},
    RANDOM_FOREST: {"max_depth": 8, "n_trees": 100},
    ADABOOST: {"max_depth": 1, "n_trees": 200},
    GRADIENT_BOOSTING: {"max_depth": 3, "n_trees": 200},
}

# Weighted error assigned to a perfect AdaBoost round.
MIN_BOOSTING_ERROR = 1e-10
# Probabilities are clipped away from 0 and 1 before taking logarithms.
PROBABILITY_EPSILON = 1e-15


class ModelError(Exception):
    """Base exception for model training, prediction and storage."""


class TrainingError(ModelError):
    """Exception raised when a training set cannot produce a model."""


class ModelDomainError(ModelError, ValueError):
    """Exception raised for invalid configurations or inputs."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    `feature_subset` None means every column of the training matrix. `max_depth` and `n_trees`
    None mean the algorithm default. A decision tree always has one tree.
    """

    algorithm: str = GRADIENT_BOOSTING
    feature_subset: Optional[Tuple[str, ...]] = None
    seed: int = 0
    max_depth: Optional[int] = None
    n_trees: Optional[int] = None
    learning_rate: float = 0.1
    min_leaf: int = 5
    feature_fraction: float = 0.5
    bootstrap: bool = True

    def __post_init__(self):
        if self.feature_subset is not None:
            object.__setattr__(self, "feature_subset", tuple(self.feature_subset))

    def resolved(self) -> "TrainConfig":
        """Returns the config with algorithm defaults filled in, after validating it.

        Raises:
            ModelDomainError: when a field is out of bounds.
        """
        if self.algorithm not in ALGORITHMS:
            raise ModelDomainError(
                f"unknown algorithm {self.algorithm!r}, expected one of {', '.join(ALGORITHMS)}"
            )
        defaults = ALGORITHM_DEFAULTS[self.algorithm]
        config = replace(
            self,
            max_depth=defaults["max_depth"] if self.max_depth is None else self.max_depth,
            n_trees=defaults["n_trees"] if self.n_trees is None else self.n_trees,
        )
        if self.algorithm == DECISION_TREE:
            config = replace(config, n_trees=1)
        if config.max_depth < 1:
            raise ModelDomainError(f"max_depth must be at least 1, got {config.max_depth}")
        if config.n_trees < 1:
            raise ModelDomainError(f"n_trees must be at least 1, got {config.n_trees}")
        if config.min_leaf < 1:
            raise ModelDomainError(f"min_leaf must be at least 1, got {config.min_leaf}")
        if not config.learning_rate > 0:
            raise ModelDomainError(f"learning_rate must be positive, got {config.learning_rate}")
        if not 0 < config.feature_fraction <= 1:
            raise ModelDomainError(
                f"feature_fraction must be within (0, 1], got {config.feature_fraction}"
            )
        if not 0 <= config.seed < 2**64:
            raise ModelDomainError(f"seed must be an unsigned 64-bit integer, got {config.seed}")
        if config.feature_subset is not None and not config.feature_subset:
            raise ModelDomainError("empty feature subset")
        return config

    def as_dict(self) -> Dict:
        """Plain dictionary form, as stored in model files and reports."""
        values = asdict(self)
        if self.feature_subset is not None:
            values["feature_subset"] = list(self.feature_subset)
        return values

    @classmethod
    def from_dict(cls, values: Dict) -> "TrainConfig":
        """Inverse of as_dict."""
        values = dict(values)
        if values.get("feature_subset") is not None:
            values["feature_subset"] = tuple(values["feature_subset"])
        return cls(**values)


@dataclass(frozen=True)
class EnsembleModel:
    """A trained classifier.

    The score of a row is, per algorithm:
        decision_tree: the leaf score of the single tree.
        random_forest: the weighted mean of leaf scores.
        adaboost: the logistic function of base_score plus the weighted sum of leaf votes.
        gradient_boosting: the logistic function of base_score plus the weighted sum of leaf
            values.
    """

    algorithm: str
    trees: Tuple[Tuple[TreeNode, float], ...]
    base_score: float
    feature_subset: Tuple[str, ...]
    config: TrainConfig
    train_loss: Tuple[float, ...] = field(default=())

    def raw_scores(self, values: np.ndarray) -> np.ndarray:
        """Scores of the rows of a 2-D array whose columns follow feature_subset."""
        values = np.asarray(values, dtype=np.float64).reshape(-1, len(self.feature_subset))
        total = np.full(values.shape[0], self.base_score, dtype=np.float64)
        for tree, weight in self.trees:
            total += weight * tree.predict(values)
        if self.algorithm in (ADABOOST, GRADIENT_BOOSTING):
            return expit(total)
        return np.clip(total, 0.0, 1.0)


def _check_training_set(
    matrix: FeatureMatrix, config: TrainConfig
) -> Tuple[np.ndarray, List[str]]:
    if not matrix.labeled:
        raise TrainingError("training needs a labeled feature matrix")
    subset = list(matrix.names) if config.feature_subset is None else list(config.feature_subset)
    if not subset:
        raise ModelDomainError("empty feature subset")
    missing = matrix.missing_features(subset)
    if missing:
        raise ModelDomainError(f"feature {missing[0]!r} is not a column of the training matrix")
    labels = matrix.labels
    if labels.size == 0 or labels.min() == labels.max():
        raise TrainingError("training needs instances of both classes")
    return matrix.select(subset).values, subset


def train(matrix: FeatureMatrix, config: TrainConfig, threads: int = 1) -> EnsembleModel:
    """Trains a classifier on a labeled matrix.

    The model depends only on the matrix and the config; `threads` changes speed, not results.

    Raises:
        ModelDomainError: for invalid configs or a feature subset outside the matrix.
        TrainingError: when the matrix is unlabeled or holds a single class.
    """
    config = config.resolved()
    values, subset = _check_training_set(matrix, config)
    labels = matrix.labels.astype(np.float64)
    builder = TreeBuilder(values, subset, config.max_depth, config.min_leaf)
    logger.info(
        f"training {config.algorithm} on {values.shape[0]} instances and {len(subset)} features"
    )

    if config.algorithm == DECISION_TREE:
        model = EnsembleModel(DECISION_TREE, ((builder.build(labels), 1.0),), 0.0, (), config)
    elif config.algorithm == RANDOM_FOREST:
        model = _train_random_forest(builder, labels, config, threads)
    elif config.algorithm == ADABOOST:
        model = _train_adaboost(builder, labels, config)
    else:
        model = _train_gradient_boosting(builder, labels, config)

    model = replace(model, feature_subset=tuple(subset), config=config)
    logger.info(f"trained {config.algorithm} with {len(model.trees)} trees")
    return model


def _log_loss(labels: np.ndarray, probabilities: np.ndarray) -> float:
    probabilities = np.clip(probabilities, PROBABILITY_EPSILON, 1 - PROBABILITY_EPSILON)
    return float(
        -np.mean(labels * np.log(probabilities) + (1 - labels) * np.log(1 - probabilities))
    )


def _feature_sampler(rng: np.random.Generator, fraction: float):
    def sample(n_features: int) -> np.ndarray:
        size = max(1, int(round(fraction * n_features)))
        if size >= n_features:
            return np.arange(n_features)
        return np.sort(rng.choice(n_features, size=size, replace=False))

    return sample


def _train_random_forest(
    builder: TreeBuilder, labels: np.ndarray, config: TrainConfig, threads: int
) -> EnsembleModel:
    n = labels.size
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    prior = float(labels.mean())

    def grow(seed: np.random.SeedSequence) -> TreeNode:
        rng = np.random.default_rng(seed)
        weights = None
        if config.bootstrap:
            weights = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        tree = builder.build(labels, weights, _feature_sampler(rng, config.feature_fraction))
        if config.bootstrap and tree.is_leaf:
            # A tree that found no split answers with the training prior, not its resample's.
            return TreeNode(score=prior)
        return tree

    if threads > 1:
        trees = Parallel(n_jobs=threads, backend="threading")(delayed(grow)(s) for s in seeds)
    else:
        trees = [grow(seed) for seed in seeds]
    weight = 1.0 / config.n_trees
    return EnsembleModel(RANDOM_FOREST, tuple((tree, weight) for tree in trees), 0.0, (), config)


def _vote(tree: TreeNode) -> TreeNode:
    """Same tree with leaves turned into votes: +1 for clickbait-majority leaves, -1 otherwise."""
    if tree.is_leaf:
        return TreeNode(score=1.0 if tree.score > 0.5 else -1.0)
    return replace(tree, left=_vote(tree.left), right=_vote(tree.right))


def _train_adaboost(
    builder: TreeBuilder, labels: np.ndarray, config: TrainConfig
) -> EnsembleModel:
    """SAMME boosting for two classes."""
    signs = 2 * labels - 1
    weights = np.full(labels.size, 1.0 / labels.size)
    margin = np.zeros(labels.size)
    trees, losses = [], []

    for round_number in range(config.n_trees):
        tree = _vote(builder.build(labels, weights))
        votes = tree.predict(builder.values)
        wrong = votes != signs
        error = float(np.dot(weights, wrong) / weights.sum())
        if error >= 0.5:
            logger.debug(f"adaboost halted at round {round_number}: weighted error {error:.6f}")
            break
        clipped = max(error, MIN_BOOSTING_ERROR)
        alpha = float(np.log((1 - clipped) / clipped))
        trees.append((tree, alpha))
        margin += alpha * votes
        losses.append(_log_loss(labels, expit(margin)))
        logger.debug(f"adaboost round {round_number}: error {error:.6f}, alpha {alpha:.6f}")
        if error == 0:
            break
        weights = weights * np.exp(alpha * wrong)
        weights /= weights.sum()

    return EnsembleModel(ADABOOST, tuple(trees), 0.0, (), config, tuple(losses))


def _train_gradient_boosting(
    builder: TreeBuilder, labels: np.ndarray, config: TrainConfig
) -> EnsembleModel:
    """Additive regression trees fit to the negative logistic loss gradient, y - p."""
    prior = float(labels.mean())
    base_score = float(np.log(prior / (1 - prior)))
    raw = np.full(labels.size, base_score)
    trees, losses = [], []

    for round_number in range(config.n_trees):
        residuals = labels - expit(raw)
        tree = builder.build(residuals)
        raw += config.learning_rate * tree.predict(builder.values)
        trees.append((tree, config.learning_rate))
        losses.append(_log_loss(labels, expit(raw)))
        logger.debug(f"boosting round {round_number}: training loss {losses[-1]:.6f}")

    return EnsembleModel(GRADIENT_BOOSTING, tuple(trees), base_score, (), config, tuple(losses))


def _missing_feature(model: EnsembleModel, names: Sequence[str]) -> Optional[str]:
    present = set(names)
    for name in model.feature_subset:
        if name not in present:
            return name
    return None


def predict_proba(model: EnsembleModel, vector: FeatureVector) -> float:
    """Clickbait probability of one feature vector.

    Raises:
        ModelDomainError: naming the first model feature the vector lacks.
    """
    missing = _missing_feature(model, vector.names)
    if missing is not None:
        raise ModelDomainError(f"feature vector {vector.instance_id} lacks feature {missing!r}")
    row = np.array([[vector[name] for name in model.feature_subset]], dtype=np.float64)
    return float(model.raw_scores(row)[0])


def predict_matrix(model: EnsembleModel, matrix: FeatureMatrix) -> np.ndarray:
    """Clickbait probabilities of every row of a matrix.

    Raises:
        ModelDomainError: naming the first model feature the matrix lacks.
    """
    missing = _missing_feature(model, matrix.names)
    if missing is not None:
        raise ModelDomainError(f"feature matrix lacks feature {missing!r}")
    if not len(matrix):
        return np.zeros(0, dtype=np.float64)
    return model.raw_scores(matrix.select(list(model.feature_subset)).values)
