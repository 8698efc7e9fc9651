# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Run configuration.

Every option, its type and its default are declared in config.yaml. A run resolves them in
three layers: config.yaml defaults, then an optional user YAML file holding a flat mapping of
option names, then command-line flags. The resolved RunConfig is embedded in every artifact.
"""

import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from constants import CONFIG_PATH, FEATURES_CSV, MODEL_FILE, RANKING_FILE
from models import ALGORITHMS, TrainConfig

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_OPTION_TYPES = {"string": str, "int": int, "float": float, "boolean": bool}


class ConfigError(Exception):
    """Exception raised when the run configuration is unreadable or invalid."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one pipeline run.

    Empty path strings mean "not given". `n_trees` and `max_depth` 0 mean the algorithm default.
    """

    instances: str
    truth: str
    schema: str
    wordlist: str
    require_labels: bool
    reference_time: str
    out: str
    matrix: str
    ranking: str
    model: str
    bins: int
    top_k: int
    algorithm: str
    features: str
    n_trees: int
    max_depth: int
    learning_rate: float
    min_leaf: int
    feature_fraction: float
    bootstrap: bool
    k_folds: int
    seed: int
    threshold: float
    positive_class: int
    alpha: float
    algorithms: str
    feature_sets: str
    threads: int
    log_level: str

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Checks the bounds of every option.

        Raises:
            ConfigError: naming the first option out of bounds.
        """
        bounds = [
            ("bins", self.bins >= 1, "at least 1"),
            ("top_k", self.top_k >= 1, "at least 1"),
            ("k_folds", self.k_folds >= 2, "at least 2"),
            ("threads", self.threads >= 1, "at least 1"),
            ("n_trees", self.n_trees >= 0, "0 or more"),
            ("max_depth", self.max_depth >= 0, "0 or more"),
            ("min_leaf", self.min_leaf >= 1, "at least 1"),
            ("seed", 0 <= self.seed < 2**64, "an unsigned 64-bit integer"),
            ("threshold", 0 <= self.threshold <= 1, "within [0, 1]"),
            ("positive_class", self.positive_class in (0, 1), "0 or 1"),
            ("alpha", 0 < self.alpha < 1, "within (0, 1)"),
            ("learning_rate", self.learning_rate > 0, "positive"),
            ("feature_fraction", 0 < self.feature_fraction <= 1, "within (0, 1]"),
            ("algorithm", self.algorithm in ALGORITHMS, f"one of {', '.join(ALGORITHMS)}"),
            (
                "log_level",
                self.log_level.upper() in LOG_LEVELS,
                f"one of {', '.join(LOG_LEVELS)}",
            ),
        ]
        for name, valid, expected in bounds:
            if not valid:
                raise ConfigError(f"option {name} must be {expected}, got {getattr(self, name)!r}")
        for algorithm in self.algorithm_list:
            if algorithm not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algorithm!r} in algorithms")
        if not self.algorithm_list:
            raise ConfigError("option algorithms names no algorithm")
        if not self.feature_set_list:
            raise ConfigError("option feature_sets names no feature set")

    @property
    def algorithm_list(self) -> List[str]:
        """Algorithms compared by the compare stage."""
        return _split_list(self.algorithms)

    @property
    def feature_set_list(self) -> List[str]:
        """Feature sets compared by the compare stage."""
        return _split_list(self.feature_sets)

    @property
    def out_dir(self) -> Path:
        """Output directory."""
        return Path(self.out)

    @property
    def matrix_path(self) -> Path:
        """Feature matrix read by the stages after extraction."""
        return Path(self.matrix) if self.matrix else self.out_dir / FEATURES_CSV

    @property
    def ranking_path(self) -> Path:
        """Ranking read by `top:k` feature selectors."""
        return Path(self.ranking) if self.ranking else self.out_dir / RANKING_FILE

    @property
    def model_path(self) -> Path:
        """Model read by the predict stage."""
        return Path(self.model) if self.model else self.out_dir / MODEL_FILE

    def require_paths(self, *names: str) -> None:
        """Checks that the named path options are set and exist.

        Raises:
            ConfigError: naming the first option that is unset or points nowhere.
        """
        for name in names:
            value = getattr(self, f"{name}_path", None) or getattr(self, name)
            if not value:
                raise ConfigError(f"option {name} is required")
            if not Path(value).exists():
                raise ConfigError(f"{name} {str(value)!r} does not exist")

    def train_config(self, feature_subset: Optional[List[str]] = None) -> TrainConfig:
        """Training hyperparameters carried by this run."""
        return TrainConfig(
            algorithm=self.algorithm,
            feature_subset=None if feature_subset is None else tuple(feature_subset),
            seed=self.seed,
            max_depth=self.max_depth or None,
            n_trees=self.n_trees or None,
            learning_rate=self.learning_rate,
            min_leaf=self.min_leaf,
            feature_fraction=self.feature_fraction,
            bootstrap=self.bootstrap,
        )

    def as_dict(self) -> Dict[str, Any]:
        """Plain dictionary form, embedded in artifacts."""
        return asdict(self)


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _read_yaml(path: Union[str, Path]) -> Dict:
    try:
        document = yaml.safe_load(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"unable to read config file {str(path)!r}: {err}")
    except yaml.YAMLError as err:
        raise ConfigError(f"invalid YAML in config file {str(path)!r}: {err}")
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"config file {str(path)!r} must hold a mapping of options")
    return document


def load_options(path: Union[str, Path] = CONFIG_PATH) -> Dict[str, Dict]:
    """Option declarations of config.yaml, keyed by option name."""
    options = _read_yaml(path).get("options")
    if not isinstance(options, dict):
        raise ConfigError(f"config file {str(path)!r} has no options section")
    for name, option in options.items():
        if option.get("type") not in _OPTION_TYPES:
            raise ConfigError(f"option {name} has unknown type {option.get('type')!r}")
    return options


def _coerce(name: str, value: Any, option_type: str) -> Any:
    expected = _OPTION_TYPES[option_type]
    # bool is an int subclass; it never stands in for a number.
    if isinstance(value, bool) and expected is not bool:
        raise ConfigError(f"option {name} must be of type {option_type}, got {value!r}")
    if expected is float and isinstance(value, int):
        return float(value)
    if not isinstance(value, expected):
        raise ConfigError(f"option {name} must be of type {option_type}, got {value!r}")
    return value


def _layer(values: Dict, layer: Dict, options: Dict, origin: str) -> None:
    for name, value in layer.items():
        if name not in options:
            raise ConfigError(f"unknown option {name!r} in {origin}")
        if value is None:
            continue
        values[name] = _coerce(name, value, options[name]["type"])


def resolve_config(
    user_config: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    options_path: Union[str, Path] = CONFIG_PATH,
) -> RunConfig:
    """Resolves a RunConfig from config.yaml defaults, a user file and command-line values.

    Override values of None are ignored, so unset flags fall through to the lower layers.

    Raises:
        ConfigError: for unreadable files, unknown options, type mismatches and bounds.
    """
    options = load_options(options_path)
    missing = {field.name for field in fields(RunConfig)} - set(options)
    if missing:
        raise ConfigError(f"config.yaml does not declare {', '.join(sorted(missing))}")

    values: Dict[str, Any] = {}
    defaults = {name: option.get("default") for name, option in options.items()}
    _layer(values, defaults, options, str(options_path))
    if user_config:
        _layer(values, _read_yaml(user_config), options, str(user_config))
        logger.info(f"read run configuration from {user_config}")
    _layer(values, overrides or {}, options, "command-line flags")
    return RunConfig(**{field.name: values[field.name] for field in fields(RunConfig)})
