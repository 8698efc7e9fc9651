#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command line of the clickbait detection pipeline.

Stages communicate through files in the output directory:

    extract   instances (+ truth) -> features.csv, features.jsonl, features.meta.json
    rank      features.csv -> ranking.txt, top_k.txt (best 12 printed)
    train     features.csv (+ ranking.txt) -> model.json
    evaluate  features.csv (+ ranking.txt) -> evaluation.txt, evaluation.jsonl
    predict   model.json + features.csv -> predictions.csv, predictions.meta.json
    stats     instances + truth -> length_stats.txt, length_stats.jsonl
    compare   features.csv (+ ranking.txt) -> comparison.txt, comparison.jsonl

Options come from config.yaml, then the --config file, then flags.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from config import LOG_LEVELS, ConfigError, RunConfig, resolve_config
from constants import (
    CATALOG_VERSION,
    FEATURES_CSV,
    FEATURES_JSONL,
    FEATURES_META,
    MODEL_FILE,
    PREDICTIONS_CSV,
    RANKING_FILE,
    TOP_K_FILE,
)
from corpus import CorpusError, Dataset, load_dataset, parse_timestamp
from evaluation import (
    EvaluationDomainError,
    compare_classifiers,
    cross_validate,
    title_length_stats,
)
from features import FeatureError, extract_dataset
from matrix import FeatureMatrix
from models import ModelError, load_model, predict_matrix, save_model, train
from reports import (
    render_ranking,
    write_comparison,
    write_evaluation,
    write_length_stats,
    write_predictions,
)
from schema import SchemaConfig
from selection import (
    GainRanking,
    SelectionDomainError,
    rank_features,
    read_ranking,
    resolve_features,
    top_k,
    write_ranking,
    write_top_k,
)
from textstats import WordListError, load_wordlist

logger = logging.getLogger(__name__)

DOMAIN_ERRORS = (
    ConfigError,
    CorpusError,
    SchemaConfig.ConfigParsingError,
    WordListError,
    FeatureError,
    SelectionDomainError,
    EvaluationDomainError,
    ModelError,
    OSError,
)


def _load_dataset(config: RunConfig, require_truth: bool) -> Dataset:
    if require_truth and not config.truth:
        raise ConfigError("a truth file is required (option truth)")
    config.require_paths("instances", *(["truth"] if config.truth else []))
    schema = SchemaConfig.from_file(config.schema) if config.schema else SchemaConfig()
    return load_dataset(config.instances, config.truth or None, schema)


def _load_matrix(config: RunConfig) -> FeatureMatrix:
    config.require_paths("matrix")
    return FeatureMatrix.read_csv(config.matrix_path)


def _load_ranking(config: RunConfig, selectors: List[str]) -> Optional[GainRanking]:
    if not any(selector.startswith("top:") for selector in selectors):
        return None
    config.require_paths("ranking")
    return read_ranking(config.ranking_path)


def _feature_subset(config: RunConfig) -> Optional[List[str]]:
    return resolve_features(config.features, _load_ranking(config, [config.features]))


def _out_dir(config: RunConfig) -> Path:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    return config.out_dir


def cmd_extract(config: RunConfig) -> None:
    """Extracts the feature matrix of a corpus."""
    dataset = _load_dataset(config, require_truth=config.require_labels)
    if config.wordlist:
        config.require_paths("wordlist")
    wordlist = load_wordlist(config.wordlist or None)
    reference = None
    if config.reference_time:
        reference = parse_timestamp(config.reference_time)
        if reference is None:
            raise ConfigError(f"unparseable reference_time {config.reference_time!r}")

    matrix = extract_dataset(dataset, wordlist, reference, config.threads)
    out_dir = _out_dir(config)
    matrix.write_csv(out_dir / FEATURES_CSV)
    matrix.write_jsonl(out_dir / FEATURES_JSONL)
    matrix.write_metadata(out_dir / FEATURES_META, config.as_dict(), CATALOG_VERSION)
    logger.info(f"wrote feature matrix of {len(matrix)} instances to {out_dir}")


def cmd_rank(config: RunConfig) -> None:
    """Ranks the features of a labeled matrix by information gain."""
    matrix = _load_matrix(config)
    ranking = rank_features(matrix, config.bins, config.threads)
    out_dir = _out_dir(config)
    run_config = config.as_dict()
    write_ranking(ranking, out_dir / RANKING_FILE, run_config)
    write_top_k(top_k(ranking, min(config.top_k, len(ranking))), out_dir / TOP_K_FILE, run_config)
    print(render_ranking(ranking, str(config.matrix_path), config.bins).rstrip("\n"))


def cmd_train(config: RunConfig) -> None:
    """Trains a classifier on a labeled matrix."""
    matrix = _load_matrix(config)
    model = train(matrix, config.train_config(_feature_subset(config)), config.threads)
    save_model(model, _out_dir(config) / MODEL_FILE, config.as_dict())


def cmd_evaluate(config: RunConfig) -> None:
    """Cross-validates a classifier on a labeled matrix."""
    matrix = _load_matrix(config)
    report = cross_validate(
        matrix,
        config.train_config(_feature_subset(config)),
        k=config.k_folds,
        seed=config.seed,
        threshold=config.threshold,
        positive_class=config.positive_class,
        threads=config.threads,
        dataset=str(config.matrix_path),
    )
    write_evaluation(report, _out_dir(config), config.as_dict())


def cmd_predict(config: RunConfig) -> None:
    """Scores every instance of a matrix with a trained model."""
    config.require_paths("model")
    model = load_model(config.model_path)
    matrix = _load_matrix(config)
    scores = predict_matrix(model, matrix)
    write_predictions(
        matrix.ids,
        scores,
        _out_dir(config) / PREDICTIONS_CSV,
        config.threshold,
        config.as_dict(),
    )


def cmd_stats(config: RunConfig) -> None:
    """Compares post title lengths of clickbait and legitimate posts."""
    dataset = _load_dataset(config, require_truth=True)
    length_stats = title_length_stats(dataset, config.alpha)
    write_length_stats(length_stats, _out_dir(config), config.as_dict())


def cmd_compare(config: RunConfig) -> None:
    """Cross-validates every configured algorithm on every configured feature set."""
    matrix = _load_matrix(config)
    rows = compare_classifiers(
        matrix,
        _load_ranking(config, config.feature_set_list),
        config.algorithm_list,
        config.feature_set_list,
        config.train_config(),
        k=config.k_folds,
        seed=config.seed,
        threshold=config.threshold,
        positive_class=config.positive_class,
        threads=config.threads,
    )
    write_comparison(rows, _out_dir(config), config.as_dict(), str(config.matrix_path))


COMMANDS: Dict[str, Callable[[RunConfig], None]] = {
    "extract": cmd_extract,
    "rank": cmd_rank,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "stats": cmd_stats,
    "compare": cmd_compare,
}


def _options_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; unset flags stay None and fall through to config."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="YAML file of run options")
    parser.add_argument("--log-level", help="diagnostics level (default INFO)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--seed", type=int, help="seed of every random choice")

    corpus = parser.add_argument_group("corpus")
    corpus.add_argument("--instances", help="line-delimited instance file")
    corpus.add_argument("--truth", help="line-delimited truth file")
    corpus.add_argument("--schema", help="INI file mapping fields onto record keys")
    corpus.add_argument("--wordlist", help="English word list, one word per line")
    corpus.add_argument(
        "--require-labels",
        action="store_const",
        const=True,
        help="fail extraction without a truth file",
    )
    corpus.add_argument("--reference-time", help="anchor of the post longevity feature")

    inputs = parser.add_argument_group("stage inputs")
    inputs.add_argument("--matrix", help="feature matrix CSV (default <out>/features.csv)")
    inputs.add_argument("--ranking", help="feature ranking (default <out>/ranking.txt)")
    inputs.add_argument("--model", help="model file (default <out>/model.json)")

    selection = parser.add_argument_group("feature selection")
    selection.add_argument("--bins", type=int, help="discretization bins")
    selection.add_argument("--top-k", type=int, help="features written to top_k.txt")
    selection.add_argument("--features", help="all, top:<k> or list:<path>")

    training = parser.add_argument_group("training")
    training.add_argument("--algorithm", help="classifier to train")
    training.add_argument("--n-trees", type=int, help="trees or rounds, 0 for the default")
    training.add_argument("--max-depth", type=int, help="tree depth, 0 for the default")
    training.add_argument("--learning-rate", type=float, help="gradient boosting shrinkage")
    training.add_argument("--min-leaf", type=int, help="minimum instances per leaf")
    training.add_argument("--feature-fraction", type=float, help="random forest split features")
    training.add_argument(
        "--bootstrap",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="resample the training set for every random forest tree",
    )

    evaluation = parser.add_argument_group("evaluation")
    evaluation.add_argument("--k-folds", type=int, help="cross-validation folds")
    evaluation.add_argument("--threshold", type=float, help="clickbait score threshold")
    evaluation.add_argument("--positive-class", type=int, help="class scored by precision")
    evaluation.add_argument("--alpha", type=float, help="significance level")
    evaluation.add_argument("--algorithms", help="comma-separated algorithms to compare")
    evaluation.add_argument("--feature-sets", help="comma-separated feature sets to compare")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """Parser of the clickbait command."""
    options = _options_parser()
    parser = argparse.ArgumentParser(
        prog="clickbait", description="Clickbait detection from hand-crafted features."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[options], help=command.__doc__)
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Runs one pipeline stage and returns the exit status."""
    args = build_parser().parse_args(argv)
    overrides = vars(args)
    command = overrides.pop("command")
    user_config = overrides.pop("config")

    level = (overrides["log_level"] or "INFO").upper()
    _configure_logging(level if level in LOG_LEVELS else "INFO")
    try:
        config = resolve_config(user_config, overrides)
    except ConfigError as err:
        logger.error(f"{command}: invalid configuration: {err}")
        return 1
    _configure_logging(config.log_level)

    try:
        COMMANDS[command](config)
    except DOMAIN_ERRORS as err:
        logger.error(f"{command} failed: {err}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
