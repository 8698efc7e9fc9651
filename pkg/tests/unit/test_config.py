# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import tempfile
import unittest
from dataclasses import FrozenInstanceError, replace
from pathlib import Path

import pytest
import yaml

from config import ConfigError, load_options, resolve_config


class TestRunConfig(unittest.TestCase):
    def setUp(self):
        self._tmp_dir = tempfile.TemporaryDirectory()
        self.tmp_dir = Path(self._tmp_dir.name)

    def tearDown(self):
        self._tmp_dir.cleanup()

    def write_yaml(self, document) -> Path:
        path = self.tmp_dir / "run.yaml"
        path.write_text(yaml.safe_dump(document))
        return path

    def test_defaults(self):
        config = resolve_config()
        self.assertEqual(config.bins, 10)
        self.assertEqual(config.k_folds, 10)
        self.assertEqual(config.algorithm, "gradient_boosting")
        self.assertEqual(config.features, "all")
        self.assertEqual(config.threshold, 0.5)
        self.assertIsInstance(config.learning_rate, float)
        self.assertTrue(config.bootstrap)
        self.assertEqual(
            config.algorithm_list,
            ["decision_tree", "random_forest", "adaboost", "gradient_boosting"],
        )
        self.assertEqual(config.feature_set_list, ["all", "top:10", "top:20"])
        self.assertEqual(config.matrix_path, Path("out") / "features.csv")
        self.assertEqual(config.ranking_path, Path("out") / "ranking.txt")
        self.assertEqual(config.model_path, Path("out") / "model.json")

    def test_every_option_is_declared(self):
        options = load_options()
        self.assertEqual(set(options), set(resolve_config().as_dict()))
        for option in options.values():
            self.assertIn("description", option)

    def test_precedence(self):
        path = self.write_yaml({"seed": 7, "bins": 4, "out": "runs/a"})
        config = resolve_config(path, {"seed": 9, "bins": None, "threads": None})
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.bins, 4)
        self.assertEqual(config.threads, 1)
        self.assertEqual(config.matrix_path, Path("runs/a/features.csv"))

        self.assertEqual(resolve_config(self.write_yaml(None)), resolve_config())

    def test_integer_for_float(self):
        config = resolve_config(overrides={"learning_rate": 1})
        self.assertEqual(config.learning_rate, 1.0)
        self.assertIsInstance(config.learning_rate, float)

    def test_invalid_options(self):
        invalid = [
            {"sedd": 3},
            {"bins": "ten"},
            {"bins": True},
            {"bootstrap": "yes"},
            {"threshold": 1.5},
            {"k_folds": 1},
            {"bins": 0},
            {"alpha": 0.0},
            {"positive_class": 2},
            {"algorithm": "svm"},
            {"algorithms": "decision_tree,svm"},
            {"feature_sets": " , "},
            {"log_level": "LOUD"},
            {"seed": -1},
            {"feature_fraction": 0.0},
        ]
        for overrides in invalid:
            with pytest.raises(ConfigError):
                resolve_config(overrides=overrides)

    def test_unreadable_files(self):
        with pytest.raises(ConfigError):
            resolve_config(self.tmp_dir / "missing.yaml")

        path = self.tmp_dir / "broken.yaml"
        path.write_text("seed: [1\n")
        with pytest.raises(ConfigError):
            resolve_config(path)

        with pytest.raises(ConfigError):
            resolve_config(self.write_yaml(["seed", 1]))

        with pytest.raises(ConfigError) as err:
            resolve_config(self.write_yaml({"seed": 1, "colour": "red"}))
        self.assertIn("colour", str(err.value))

        options = self.write_yaml({"options": {"seed": {"default": 0, "type": "number"}}})
        with pytest.raises(ConfigError):
            load_options(options)

    def test_require_paths(self):
        instances = self.tmp_dir / "instances.jsonl"
        instances.write_text("")
        config = resolve_config(overrides={"instances": str(instances), "out": str(self.tmp_dir)})
        config.require_paths("instances")

        with pytest.raises(ConfigError) as err:
            config.require_paths("truth")
        self.assertIn("truth", str(err.value))
        with pytest.raises(ConfigError):
            config.require_paths("matrix")

    def test_train_config(self):
        config = resolve_config(overrides={"algorithm": "random_forest", "n_trees": 30})
        train_config = config.train_config(["a", "b"])
        self.assertEqual(train_config.algorithm, "random_forest")
        self.assertEqual(train_config.n_trees, 30)
        self.assertIsNone(train_config.max_depth)
        self.assertEqual(train_config.feature_subset, ("a", "b"))
        self.assertIsNone(config.train_config().feature_subset)

    def test_frozen_and_validated(self):
        config = resolve_config()
        with pytest.raises(FrozenInstanceError):
            config.seed = 3
        with pytest.raises(ConfigError):
            replace(config, top_k=0)
