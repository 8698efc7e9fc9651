# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

import csv
import json
import tempfile
import unittest
from pathlib import Path

from evaluation import ComparisonRow, EvaluationReport, LengthRow, LengthStats, MetricSet
from reports import (
    evaluation_records,
    render_comparison,
    render_evaluation,
    render_length_stats,
    render_ranking,
    write_comparison,
    write_evaluation,
    write_length_stats,
    write_predictions,
)
from selection import GainRanking


def sample_report(auc: float = 0.8125) -> EvaluationReport:
    folds = (MetricSet(0.75, 0.5, 0.25, 1.0), MetricSet(0.875, 1.0, 0.0, 0.0, ("precision",)))
    return EvaluationReport(
        per_fold=folds,
        aggregate=MetricSet(auc, 0.75, 0.125, 0.5, ("precision",)),
        pooled=MetricSet(0.8, 0.75, 0.5, 0.5),
        by_positive_class={
            1: MetricSet(auc, 0.75, 0.125, 0.5, ("precision",)),
            0: MetricSet(auc, 0.75, 0.6, 0.9),
        },
        config={"algorithm": "adaboost", "n_trees": 4},
        dataset="out/features.csv",
        k=2,
        seed=5,
        threshold=0.5,
        positive_class=1,
        fold_sizes=(6, 5),
    )


class TestReports(unittest.TestCase):
    def setUp(self):
        self._tmp_dir = tempfile.TemporaryDirectory()
        self.tmp_dir = Path(self._tmp_dir.name)

    def tearDown(self):
        self._tmp_dir.cleanup()

    def read_records(self, name: str):
        with open(self.tmp_dir / name, "r") as file:
            return [json.loads(line) for line in file]

    def test_render_ranking(self):
        ranking = GainRanking(
            entries=tuple((f"feature_{index}", 1.0 / (index + 1)) for index in range(15))
        )
        text = render_ranking(ranking, "features.csv", 10)
        lines = text.splitlines()

        self.assertIn("features.csv, 10 bins", lines[0])
        self.assertTrue(lines[2].startswith("rank  feature   "))
        self.assertEqual(lines[3], "   1  feature_0   1.000000")
        self.assertEqual(len(lines), 3 + 12)
        self.assertNotIn("feature_12", text)

    def test_render_evaluation(self):
        text = render_evaluation(sample_report())
        self.assertIn("adaboost on out/features.csv: 2-fold cross-validation, seed 5", text)
        self.assertIn("   1      6   0.7500", text)
        self.assertIn("   2      5   0.8750", text)
        self.assertIn("mean          0.8125", text)
        self.assertIn("pooled        0.8000", text)
        self.assertIn("undefined in some folds (reported as 0): precision", text)

    def test_write_evaluation(self):
        write_evaluation(sample_report(), self.tmp_dir, {"seed": 5})
        self.assertTrue((self.tmp_dir / "evaluation.txt").read_text().endswith("\n"))

        records = self.read_records("evaluation.jsonl")
        self.assertEqual(len(records), 2 + 2)
        kinds = [record["record"] for record in records]
        self.assertEqual(kinds, ["fold", "fold", "pooled", "aggregate"])
        self.assertEqual(records[0]["size"], 6)
        self.assertEqual(records[1]["metrics"]["undefined"], ["precision"])
        self.assertEqual(records[3]["by_positive_class"]["0"]["precision"], 0.6)
        for record in records:
            self.assertEqual(record["run_config"], {"seed": 5})
            self.assertEqual(record["train_config"]["n_trees"], 4)
            self.assertEqual(record["k"], 2)

        self.assertEqual(evaluation_records(sample_report(), {})[2]["metrics"]["auc"], 0.8)

    def test_comparison(self):
        rows = [
            ComparisonRow("gradient_boosting", "top:10", sample_report(0.9)),
            ComparisonRow("decision_tree", "all", sample_report(0.7)),
        ]
        text = render_comparison(rows, "features.csv")
        lines = text.splitlines()
        self.assertIn("2-fold cross-validation, seed 5", lines[0])
        self.assertTrue(lines[3].startswith("gradient_boosting   top:10         0.9000"))
        self.assertTrue(lines[4].startswith("decision_tree       all            0.7000"))

        write_comparison(rows, self.tmp_dir, {"features": "all"}, "features.csv")
        records = self.read_records("comparison.jsonl")
        self.assertEqual([record["rank"] for record in records], [1, 2])
        self.assertEqual(records[0]["algorithm"], "gradient_boosting")
        self.assertEqual(records[1]["aggregate"]["auc"], 0.7)
        self.assertTrue((self.tmp_dir / "comparison.txt").exists())

    def test_length_stats(self):
        length_stats = LengthStats(
            dataset="train",
            alpha=0.05,
            rows=(
                LengthRow("characters", 54.25, 61.5, 10, 12, 0.0123, 0.0456, True),
                LengthRow("words", 9.0, 9.0, 10, 12, None, None, None),
            ),
        )
        text = render_length_stats(length_stats)
        self.assertIn("Post title length measures of train (alpha 0.05)", text)
        self.assertIn("mean num of characters", text)
        self.assertIn("1.23e-02  4.56e-02  yes", text)
        self.assertIn("     n/a       n/a  n/a", text)
        self.assertRegex(text, r"titled posts\s+10\s+12")

        write_length_stats(length_stats, self.tmp_dir, {"alpha": 0.05})
        records = self.read_records("length_stats.jsonl")
        self.assertEqual([record["unit"] for record in records], ["characters", "words"])
        self.assertIsNone(records[1]["t_p_value"])
        self.assertTrue(records[0]["significant"])

    def test_write_predictions(self):
        path = self.tmp_dir / "predictions.csv"
        write_predictions(["a", "b", "c"], [0.5, 0.25, 0.75], path, threshold=0.5)
        with open(path, "r", newline="") as file:
            rows = list(csv.reader(file))
        self.assertEqual(rows[0], ["id", "score", "predicted"])
        self.assertEqual(rows[1:], [["a", "0.5", "1"], ["b", "0.25", "0"], ["c", "0.75", "1"]])
        self.assertFalse((self.tmp_dir / "predictions.meta.json").exists())

    def test_write_predictions_metadata(self):
        path = self.tmp_dir / "predictions.csv"
        run_config = {"seed": 3, "threshold": 0.7}
        write_predictions(["a", "b", "c"], [0.5, 0.25, 0.75], path, 0.7, run_config)
        with open(path, "r", newline="") as file:
            rows = list(csv.reader(file))
        self.assertEqual([row[2] for row in rows[1:]], ["0", "0", "1"])

        metadata = json.loads((self.tmp_dir / "predictions.meta.json").read_text())
        self.assertEqual(
            metadata,
            {
                "instances": 3,
                "predicted_clickbait": 1,
                "threshold": 0.7,
                "run_config": run_config,
            },
        )
