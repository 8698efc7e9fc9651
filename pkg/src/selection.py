# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Information gain ranking of features against the binary label."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from matrix import FeatureMatrix

logger = logging.getLogger(__name__)

DEFAULT_BINS = 10
SENTINEL = -1.0
# Numerical slack when clamping a gain into [0, H(labels)].
GAIN_TOLERANCE = 1e-12


class SelectionDomainError(ValueError):
    """Exception raised when a selection operation is called outside its domain."""


@dataclass(frozen=True)
class GainRanking:
    """Features with their information gain, best first."""

    entries: Tuple[Tuple[str, float], ...]

    def __len__(self) -> int:
        """Number of ranked features."""
        return len(self.entries)

    @property
    def names(self) -> List[str]:
        """Feature names, best first."""
        return [name for name, _ in self.entries]

    def gain_of(self, name: str) -> float:
        """Gain of a ranked feature."""
        for entry_name, gain in self.entries:
            if entry_name == name:
                return gain
        raise SelectionDomainError(f"feature {name!r} is not ranked")


def entropy(labels: Sequence[int]) -> float:
    """Shannon entropy of binary labels, in bits."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise SelectionDomainError("entropy of an empty label vector")
    counts = np.bincount(labels, minlength=2)
    probabilities = counts[counts > 0] / labels.size
    return float(max(0.0, -np.sum(probabilities * np.log2(probabilities))))


def discretize(column: Sequence[float], bins: int = DEFAULT_BINS) -> np.ndarray:
    """Assigns every value a bin code.

    The sentinel gets code -1. Other values fall into equal-frequency bins whose boundaries are
    values of the column itself, so ties never straddle a boundary and any strictly increasing
    transformation of the column yields the same codes. With a single bin every value, the
    sentinel included, shares code 0.
    """
    if bins < 1:
        raise SelectionDomainError(f"bins must be positive, got {bins}")
    column = np.asarray(column, dtype=np.float64)
    codes = np.zeros(column.shape, dtype=np.int64)
    if bins == 1:
        return codes

    present = column != SENTINEL
    values = np.sort(column[present])
    if values.size:
        positions = (np.arange(1, bins) * values.size) // bins
        boundaries = np.unique(values[positions])
        codes[present] = np.searchsorted(boundaries, column[present], side="right")
    codes[~present] = -1
    return codes


def conditional_entropy(codes: np.ndarray, labels: np.ndarray) -> float:
    """Label entropy remaining once the bin code is known."""
    total = 0.0
    for code in np.unique(codes):
        members = labels[codes == code]
        total += members.size / labels.size * entropy(members)
    return total


def information_gain(
    column: Sequence[float], labels: Sequence[int], bins: int = DEFAULT_BINS
) -> float:
    """Reduction of label entropy from knowing the discretized column.

    Raises:
        SelectionDomainError: when the column and labels are empty or differ in length.
    """
    column = np.asarray(column, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if column.shape != labels.shape:
        raise SelectionDomainError(
            f"column of length {column.size} against {labels.size} labels"
        )
    prior = entropy(labels)
    gain = prior - conditional_entropy(discretize(column, bins), labels)
    if gain < -GAIN_TOLERANCE or gain > prior + GAIN_TOLERANCE:
        logger.warning(f"information gain {gain} outside [0, {prior}]")
    return float(min(max(gain, 0.0), prior))


def rank_features(
    matrix: FeatureMatrix, bins: int = DEFAULT_BINS, threads: int = 1
) -> GainRanking:
    """Ranks every column of a labeled matrix by information gain.

    Ties keep the column order of the matrix.
    """
    if not matrix.labeled:
        raise SelectionDomainError("ranking needs a labeled feature matrix")
    if bins == 1:
        logger.warning("a single bin carries no information, every gain is 0")

    columns = [matrix.values[:, index] for index in range(len(matrix.names))]
    if threads > 1:
        gains = Parallel(n_jobs=threads, backend="threading")(
            delayed(information_gain)(column, matrix.labels, bins) for column in columns
        )
    else:
        gains = [information_gain(column, matrix.labels, bins) for column in columns]

    order = sorted(range(len(gains)), key=lambda index: (-gains[index], index))
    ranking = GainRanking(entries=tuple((matrix.names[index], gains[index]) for index in order))
    logger.info(f"ranked {len(ranking)} features over {len(matrix)} instances")
    return ranking


def top_k(ranking: GainRanking, k: int) -> List[str]:
    """The k best feature names."""
    if not 1 <= k <= len(ranking):
        raise SelectionDomainError(f"k must be within [1, {len(ranking)}], got {k}")
    return ranking.names[:k]


def write_ranking(
    ranking: GainRanking, path: Union[str, Path], run_config: Optional[Dict] = None
) -> None:
    """Writes the ranking as a two-column table preceded by a commented run configuration."""
    width = max((len(name) for name in ranking.names), default=0)
    with open(path, "w", encoding="utf-8") as file:
        if run_config is not None:
            file.write(f"# run_config: {json.dumps(run_config, sort_keys=True)}\n")
        for name, gain in ranking.entries:
            file.write(f"{name:<{width}}  {gain:.6f}\n")
    logger.info(f"wrote ranking of {len(ranking)} features to {path}")


def read_ranking(path: Union[str, Path]) -> GainRanking:
    """Reads a ranking written by write_ranking."""
    entries = []
    for line_number, line in _content_lines(path):
        try:
            name, gain = line.rsplit(maxsplit=1)
            entries.append((name.strip(), float(gain)))
        except ValueError:
            raise SelectionDomainError(f"{path}:{line_number}: malformed ranking line")
    return GainRanking(entries=tuple(entries))


def write_top_k(
    names: Sequence[str], path: Union[str, Path], run_config: Optional[Dict] = None
) -> None:
    """Writes a feature list, one name per line, preceded by a commented run configuration."""
    with open(path, "w", encoding="utf-8") as file:
        if run_config is not None:
            file.write(f"# run_config: {json.dumps(run_config, sort_keys=True)}\n")
        for name in names:
            file.write(f"{name}\n")


def read_feature_list(path: Union[str, Path]) -> List[str]:
    """Reads a feature list; blank lines and "#" comments are skipped."""
    names = [line for _, line in _content_lines(path)]
    if not names:
        raise SelectionDomainError(f"feature list {path} is empty")
    return names


def _content_lines(path: Union[str, Path]) -> List[Tuple[int, str]]:
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = file.read().splitlines()
    except (OSError, UnicodeDecodeError) as err:
        raise SelectionDomainError(f"unable to read {path}: {err}")
    return [
        (number, line.strip())
        for number, line in enumerate(lines, start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]


def resolve_features(selector: str, ranking: Optional[GainRanking] = None) -> Optional[List[str]]:
    """Feature names picked by a selector: "all", "top:<k>" or "list:<path>".

    "all" yields None, meaning every column. "top:<k>" needs a ranking.
    """
    kind, _, argument = selector.partition(":")
    if kind == "all" and not argument:
        return None
    if kind == "top":
        if ranking is None:
            raise SelectionDomainError(f"feature selector {selector!r} needs a ranking")
        try:
            k = int(argument)
        except ValueError:
            raise SelectionDomainError(f"invalid feature selector {selector!r}")
        return top_k(ranking, k)
    if kind == "list" and argument:
        return read_feature_list(argument)
    raise SelectionDomainError(
        f"invalid feature selector {selector!r}, expected all, top:<k> or list:<path>"
    )
