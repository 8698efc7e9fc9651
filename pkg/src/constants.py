#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Constants for the clickbait detection pipeline."""

from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parent.parent
TEMPLATES_DIR = ROOT_DIR / "templates"
DATA_DIR = ROOT_DIR / "data"
CONFIG_PATH = ROOT_DIR / "config.yaml"
WORDLIST_PATH = DATA_DIR / "english_words.txt"

MISSING = -1.0

CLICKBAIT = 1
LEGITIMATE = 0

# Clickbait Challenge 2017 record layout.
DEFAULT_INSTANCE_KEYS = {
    "id": "id",
    "post_title": "postText",
    "post_timestamp": "postTimestamp",
    "image_ref": "postMedia",
    "article_title": "targetTitle",
    "article_description": "targetDescription",
    "article_keywords": "targetKeywords",
    "article_paragraphs": "targetParagraphs",
    "article_captions": "targetCaptions",
}
DEFAULT_TRUTH_KEYS = {
    "id": "id",
    "label": "truthClass",
    "positive": "clickbait",
    "negative": "no-clickbait",
}

CHALLENGE_TIMESTAMP_FORMAT = "%a %b %d %H:%M:%S %z %Y"
IMAGE_TEXT_SUFFIX = ".txt"

MODEL_FORMAT = "clickbait-ensemble"
MODEL_FORMAT_VERSION = 1
CATALOG_VERSION = 1

FEATURES_CSV = "features.csv"
FEATURES_JSONL = "features.jsonl"
FEATURES_META = "features.meta.json"
RANKING_FILE = "ranking.txt"
TOP_K_FILE = "top_k.txt"
MODEL_FILE = "model.json"
EVALUATION_TXT = "evaluation.txt"
EVALUATION_JSONL = "evaluation.jsonl"
PREDICTIONS_CSV = "predictions.csv"
PREDICTIONS_META = "predictions.meta.json"
LENGTH_STATS_TXT = "length_stats.txt"
LENGTH_STATS_JSONL = "length_stats.jsonl"
COMPARISON_TXT = "comparison.txt"
COMPARISON_JSONL = "comparison.jsonl"

RANKING_ECHO = 12
