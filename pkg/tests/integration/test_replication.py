#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import logging

import pytest

from evaluation import cross_validate, title_length_stats
from models import GRADIENT_BOOSTING, TrainConfig
from selection import rank_features

from .helpers.corpus import TRAIN_ENV, VALIDATION_ENV

logger = logging.getLogger(__name__)

pytestmark = pytest.mark.replication

# (clickbait, legitimate) mean post title lengths.
TITLE_CHARACTERS = {TRAIN_ENV: (71.83, 81.746), VALIDATION_ENV: (59.288, 74.69)}
TITLE_WORDS = {TRAIN_ENV: (11.787, 12.877), VALIDATION_ENV: (10.012, 11.898)}
MIN_AUC = {TRAIN_ENV: 0.67, VALIDATION_ENV: 0.75}

# Features reported as most informative on the validation corpus.
PUBLISHED_TOP_FEATURES = [
    "num of characters in post title",
    "num of characters ratio post title & post image text",
    "diff num of characters post title & article keywords",
    "diff num of characters post title & post image text",
    "num of words ratio post title & post image text",
    "num of words in post title",
    "num of formal words in post title",
    "num of words ratio post title & article description",
    "num of characters ratio post title & article description",
    "num of characters ratio post title & article title",
    "num of words ratio post title & article title",
    "diff num of words post title & article keywords",
]


def test_title_lengths(challenge_corpus):
    corpus, dataset, _ = challenge_corpus
    length_stats = title_length_stats(dataset)

    characters = length_stats.row("characters")
    words = length_stats.row("words")
    assert characters.clickbait_mean == pytest.approx(TITLE_CHARACTERS[corpus][0], abs=2.0)
    assert characters.legitimate_mean == pytest.approx(TITLE_CHARACTERS[corpus][1], abs=2.0)
    assert words.clickbait_mean == pytest.approx(TITLE_WORDS[corpus][0], abs=0.8)
    assert words.legitimate_mean == pytest.approx(TITLE_WORDS[corpus][1], abs=0.8)
    for row in length_stats.rows:
        assert row.t_p_value < 0.05 and row.u_p_value < 0.05, row.unit


def test_gradient_boosting_auc(challenge_corpus):
    corpus, _, matrix = challenge_corpus
    report = cross_validate(matrix, TrainConfig(algorithm=GRADIENT_BOOSTING), k=10, threads=4)
    logger.info(f"{corpus}: mean AUC {report.aggregate.auc:.4f}")
    assert report.aggregate.auc >= MIN_AUC[corpus]


def test_ranking_shape(challenge_corpus):
    corpus, _, matrix = challenge_corpus
    if corpus != VALIDATION_ENV:
        pytest.skip("the ranking shape is checked on the validation corpus")
    assert set(PUBLISHED_TOP_FEATURES) <= set(matrix.names)
    top = rank_features(matrix, threads=4).names[:20]
    assert len(set(top) & set(PUBLISHED_TOP_FEATURES)) >= 6
