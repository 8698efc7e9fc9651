#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import json
from pathlib import Path

from constants import (
    COMPARISON_JSONL,
    COMPARISON_TXT,
    EVALUATION_JSONL,
    EVALUATION_TXT,
    FEATURES_CSV,
    FEATURES_JSONL,
    FEATURES_META,
    LENGTH_STATS_JSONL,
    LENGTH_STATS_TXT,
    MODEL_FILE,
    PREDICTIONS_CSV,
    PREDICTIONS_META,
    RANKING_FILE,
    TOP_K_FILE,
)

from .helpers.corpus import run_pipeline

FAST_FLAGS = ("--k-folds", "5", "--n-trees", "20", "--feature-sets", "all,top:10")
ARTIFACTS = [
    FEATURES_CSV,
    FEATURES_JSONL,
    FEATURES_META,
    RANKING_FILE,
    TOP_K_FILE,
    MODEL_FILE,
    PREDICTIONS_CSV,
    PREDICTIONS_META,
    EVALUATION_TXT,
    EVALUATION_JSONL,
    LENGTH_STATS_TXT,
    LENGTH_STATS_JSONL,
    COMPARISON_TXT,
    COMPARISON_JSONL,
]


def test_artifact_layout(synthetic_corpus: Path, tmp_path: Path):
    out = tmp_path / "out"
    run_pipeline(synthetic_corpus, out, *FAST_FLAGS)

    assert sorted(path.name for path in out.iterdir()) == sorted(ARTIFACTS)
    metadata = json.loads((out / FEATURES_META).read_text())
    assert metadata["features"] == 188
    assert metadata["labeled"] is True

    model = json.loads((out / MODEL_FILE).read_text())
    assert len(model["feature_subset"]) == 10
    assert model["run_config"]["features"] == "top:10"

    with open(out / EVALUATION_JSONL, "r") as file:
        records = [json.loads(line) for line in file]
    assert [record["record"] for record in records][-2:] == ["pooled", "aggregate"]
    assert all(record["run_config"]["seed"] == 0 for record in records)
    assert 0.0 <= records[-1]["metrics"]["auc"] <= 1.0


def test_determinism(synthetic_corpus: Path, tmp_path: Path):
    """Two runs with the same configuration produce byte-identical artifacts."""
    first, second = tmp_path / "first", tmp_path / "second"
    config = tmp_path / "run.yaml"
    config.write_text("seed: 17\n")

    for out in (first, second):
        run_pipeline(synthetic_corpus, tmp_path / "shared", "--config", str(config), *FAST_FLAGS)
        (tmp_path / "shared").rename(out)

    for name in ARTIFACTS:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_threads_do_not_change_results(synthetic_corpus: Path, tmp_path: Path):
    sequential, threaded = tmp_path / "sequential", tmp_path / "threaded"
    run_pipeline(synthetic_corpus, sequential, *FAST_FLAGS)
    run_pipeline(synthetic_corpus, threaded, "--threads", "3", *FAST_FLAGS)

    assert (sequential / FEATURES_CSV).read_bytes() == (threaded / FEATURES_CSV).read_bytes()
    assert (sequential / PREDICTIONS_CSV).read_bytes() == (threaded / PREDICTIONS_CSV).read_bytes()
    models = [json.loads((out / MODEL_FILE).read_text()) for out in (sequential, threaded)]
    assert models[0].pop("run_config")["threads"] == 1
    assert models[1].pop("run_config")["threads"] == 3
    assert models[0] == models[1]
