# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import math
import tempfile
import unittest
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from matrix import FeatureMatrix
from selection import (
    GainRanking,
    SelectionDomainError,
    discretize,
    entropy,
    information_gain,
    rank_features,
    read_feature_list,
    read_ranking,
    resolve_features,
    top_k,
    write_ranking,
    write_top_k,
)

LABELS = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1]


def brute_force_gain(codes, labels) -> float:
    def bits(values) -> float:
        counts = Counter(values)
        return -sum(c / len(values) * math.log2(c / len(values)) for c in counts.values())

    remaining = 0.0
    for code in set(codes):
        members = [label for c, label in zip(codes, labels) if c == code]
        remaining += len(members) / len(labels) * bits(members)
    return bits(labels) - remaining


def partition_gain(column, labels, bins: int) -> float:
    """Gain over an explicit partition: the sentinel alone, then equal-frequency value ranges."""
    present = sorted(value for value in column if value != -1.0)
    cuts = sorted({present[i * len(present) // bins] for i in range(1, bins)}) if present else []
    groups = {}
    for value, label in zip(column, labels):
        if bins == 1:
            key = 0
        elif value == -1.0:
            key = "missing"
        else:
            key = sum(1 for cut in cuts if cut <= value)
        groups.setdefault(key, []).append(label)
    return brute_force_gain(
        [key for key, members in groups.items() for _ in members],
        [label for members in groups.values() for label in members],
    )


def labeled_matrix() -> FeatureMatrix:
    noise = [3.0] * len(LABELS)
    good = [float(label) * 2 + 1 for label in LABELS]
    partial = [0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0]
    return FeatureMatrix(
        ids=tuple(str(index) for index in range(len(LABELS))),
        names=("noise", "partial", "good"),
        values=np.array([noise, partial, good]).T,
        labels=np.array(LABELS),
    )


class TestGain(unittest.TestCase):
    def test_entropy(self):
        self.assertAlmostEqual(entropy([0, 1]), 1.0)
        self.assertEqual(entropy([1, 1, 1]), 0.0)
        self.assertAlmostEqual(entropy([0, 0, 0, 1]), 0.8112781244591328)
        with pytest.raises(SelectionDomainError):
            entropy([])

    def test_discretize(self):
        self.assertEqual(discretize([-1.0, 1.0, 2.0, 3.0, 4.0], 2).tolist(), [-1, 0, 0, 1, 1])
        self.assertEqual(discretize([-1.0, -1.0], 4).tolist(), [-1, -1])
        self.assertEqual(discretize([-1.0, 5.0, 7.0], 1).tolist(), [0, 0, 0])

        # Ties share a code.
        codes = discretize([1.0, 1.0, 1.0, 1.0, 2.0], 4)
        self.assertEqual(len(set(codes[:4].tolist())), 1)

        with pytest.raises(SelectionDomainError):
            discretize([1.0], 0)

    def test_discretize_monotone_invariance(self):
        column = np.random.default_rng(3).integers(0, 20, size=200).astype(np.float64)
        for bins in (2, 5, 10):
            self.assertEqual(
                discretize(column, bins).tolist(), discretize(column * 3.0 + 7.0, bins).tolist()
            )
            self.assertEqual(
                discretize(column, bins).tolist(), discretize(np.exp(column / 4), bins).tolist()
            )

    def test_information_gain(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            column = rng.integers(-1, 6, size=60).astype(np.float64)
            labels = rng.integers(0, 2, size=60)
            expected = brute_force_gain(discretize(column, 4).tolist(), labels.tolist())
            gain = information_gain(column, labels, 4)
            self.assertAlmostEqual(gain, max(expected, 0.0), places=9)
            self.assertGreaterEqual(gain, 0.0)
            self.assertLessEqual(gain, entropy(labels))

        self.assertAlmostEqual(information_gain([0.0, 0.0, 1.0, 1.0], [0, 0, 1, 1], 2), 1.0)
        self.assertAlmostEqual(partition_gain([0.0, 0.0, 1.0, 1.0], [0, 0, 1, 1], 2), 1.0)
        self.assertEqual(information_gain([5.0] * 4, [0, 1, 0, 1]), 0.0)
        with pytest.raises(SelectionDomainError):
            information_gain([1.0, 2.0], [1])


class TestRanking(unittest.TestCase):
    def setUp(self):
        self._tmp_dir = tempfile.TemporaryDirectory()
        self.tmp_dir = Path(self._tmp_dir.name)

    def tearDown(self):
        self._tmp_dir.cleanup()

    def test_rank_features(self):
        ranking = rank_features(labeled_matrix())
        self.assertEqual(ranking.names, ["good", "partial", "noise"])
        self.assertAlmostEqual(ranking.gain_of("good"), 1.0)
        self.assertEqual(ranking.gain_of("noise"), 0.0)
        self.assertEqual(rank_features(labeled_matrix(), threads=2), ranking)

        with pytest.raises(SelectionDomainError):
            ranking.gain_of("missing")

    def test_rank_features_against_explicit_partitions(self):
        rng = np.random.default_rng(1337)
        for trial in range(50):
            values = rng.integers(-1, 9, size=(30, 5)).astype(np.float64)
            values[:, 4] = np.where(rng.random(30) < 0.2, -1.0, rng.normal(size=30))
            labels = rng.integers(0, 2, size=30)
            matrix = FeatureMatrix(
                ids=tuple(str(index) for index in range(30)),
                names=tuple(f"f{index}" for index in range(5)),
                values=values,
                labels=labels,
            )
            bins = int(rng.integers(1, 11))
            ranking = rank_features(matrix, bins)

            for index, name in enumerate(matrix.names):
                expected = partition_gain(values[:, index].tolist(), labels.tolist(), bins)
                self.assertAlmostEqual(ranking.gain_of(name), max(expected, 0.0), places=9)
                self.assertLessEqual(ranking.gain_of(name), entropy(labels))
            gains = [gain for _, gain in ranking.entries]
            self.assertEqual(gains, sorted(gains, reverse=True), trial)

    def test_rank_ties_keep_column_order(self):
        matrix = FeatureMatrix(
            ids=("a", "b"), names=("z", "a"), values=np.ones((2, 2)), labels=np.array([0, 1])
        )
        self.assertEqual(rank_features(matrix).names, ["z", "a"])

    def test_rank_single_bin(self):
        with self.assertLogs("selection", level="WARNING"):
            ranking = rank_features(labeled_matrix(), bins=1)
        self.assertEqual([gain for _, gain in ranking.entries], [0.0, 0.0, 0.0])

    def test_rank_unlabeled(self):
        matrix = FeatureMatrix(ids=("a",), names=("x",), values=np.zeros((1, 1)))
        with pytest.raises(SelectionDomainError):
            rank_features(matrix)

    def test_top_k(self):
        ranking = GainRanking(entries=(("b", 0.5), ("a", 0.25), ("c", 0.0)))
        self.assertEqual(top_k(ranking, 2), ["b", "a"])
        self.assertEqual(top_k(ranking, 3), ["b", "a", "c"])
        with pytest.raises(SelectionDomainError):
            top_k(ranking, 0)
        with pytest.raises(SelectionDomainError):
            top_k(ranking, 4)

    def test_ranking_file(self):
        ranking = GainRanking(entries=(("char_count_post_title", 0.5), ("image_count", 0.25)))
        path = self.tmp_dir / "ranking.txt"
        write_ranking(ranking, path, {"bins": 10})

        with open(path, "r") as file:
            lines = file.read().splitlines()
        self.assertEqual(lines[0], '# run_config: {"bins": 10}')
        self.assertEqual(lines[2], "image_count            0.250000")
        self.assertEqual(read_ranking(path), ranking)

        path.write_text("lonely\n")
        with pytest.raises(SelectionDomainError):
            read_ranking(path)

    def test_feature_list(self):
        path = self.tmp_dir / "top_k.txt"
        write_top_k(["b", "a"], path)
        self.assertEqual(read_feature_list(path), ["b", "a"])

        write_top_k(["b", "a"], path, {"bins": 10, "top_k": 2})
        header = path.read_text().splitlines()[0]
        self.assertEqual(header, '# run_config: {"bins": 10, "top_k": 2}')
        self.assertEqual(read_feature_list(path), ["b", "a"])

        path.write_text("# picked by hand\n\n  c  \n")
        self.assertEqual(read_feature_list(path), ["c"])

        path.write_text("# nothing\n")
        with pytest.raises(SelectionDomainError):
            read_feature_list(path)
        with pytest.raises(SelectionDomainError):
            read_feature_list(self.tmp_dir / "missing.txt")

    def test_resolve_features(self):
        ranking = GainRanking(entries=(("b", 0.5), ("a", 0.25)))
        path = self.tmp_dir / "features.txt"
        path.write_text("a\n")

        self.assertIsNone(resolve_features("all"))
        self.assertEqual(resolve_features("top:1", ranking), ["b"])
        self.assertEqual(resolve_features(f"list:{path}"), ["a"])

        for selector in ("top:1", "top:two", "every", "all:3", "list:"):
            with pytest.raises(SelectionDomainError):
                resolve_features(selector, None if selector == "top:1" else ranking)
