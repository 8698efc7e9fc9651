# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Tree ensemble classifiers and their model files."""

from models.ensembles import (  # noqa: F401
    ADABOOST,
    ALGORITHMS,
    DECISION_TREE,
    GRADIENT_BOOSTING,
    RANDOM_FOREST,
    EnsembleModel,
    ModelDomainError,
    ModelError,
    TrainConfig,
    TrainingError,
    predict_matrix,
    predict_proba,
    train,
)
from models.storage import ModelLoadError, load_model, save_model  # noqa: F401
