#!/usr/bin/env python3
# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

from pathlib import Path
from typing import Tuple

import pytest

from corpus import Dataset, load_dataset
from features import extract_dataset
from matrix import FeatureMatrix
from textstats import load_wordlist

from .helpers.corpus import TRAIN_ENV, VALIDATION_ENV, corpus_dir, write_corpus


@pytest.fixture(scope="module")
def synthetic_corpus(tmp_path_factory) -> Path:
    """A generated labeled corpus with image text sidecars."""
    directory = tmp_path_factory.mktemp("corpus")
    write_corpus(directory)
    return directory


@pytest.fixture(scope="module", params=[TRAIN_ENV, VALIDATION_ENV])
def challenge_corpus(request) -> Tuple[str, Dataset, FeatureMatrix]:
    """A Clickbait Challenge 2017 corpus and its feature matrix.

    Skips unless the environment variable of the parameter names a directory holding
    instances.jsonl and truth.jsonl.
    """
    directory = corpus_dir(request.param)
    if directory is None:
        pytest.skip(f"{request.param} does not point at a directory with instances and truth")
    dataset = load_dataset(directory / "instances.jsonl", directory / "truth.jsonl")
    matrix = extract_dataset(dataset, load_wordlist(), threads=4)
    return request.param, dataset, matrix
