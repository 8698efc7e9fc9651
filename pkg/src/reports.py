# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Human-readable tables and machine-readable records of pipeline results.

Tables are rendered from the Jinja2 templates under templates/. Every JSON Lines record carries
the run configuration that produced it.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from jinja2 import Template

from constants import (
    CLICKBAIT,
    COMPARISON_JSONL,
    COMPARISON_TXT,
    EVALUATION_JSONL,
    EVALUATION_TXT,
    LEGITIMATE,
    LENGTH_STATS_JSONL,
    LENGTH_STATS_TXT,
    RANKING_ECHO,
    TEMPLATES_DIR,
)
from evaluation import ComparisonRow, EvaluationReport, LengthStats
from selection import GainRanking

logger = logging.getLogger(__name__)


def render(template_name: str, **context) -> str:
    """Renders one of the bundled templates."""
    with open(TEMPLATES_DIR / template_name, "r") as file:
        template = Template(file.read())
    return template.render(**context)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as file:
        file.write(text)
        if not text.endswith("\n"):
            file.write("\n")


def _write_records(path: Path, records: Sequence[Dict]) -> None:
    with open(path, "w", encoding="utf-8") as file:
        for record in records:
            file.write(json.dumps(record, sort_keys=True))
            file.write("\n")


def render_ranking(
    ranking: GainRanking, dataset: str = "", bins: int = 0, count: int = RANKING_ECHO
) -> str:
    """Table of the best `count` features of a ranking."""
    entries = [
        {"rank": rank, "name": name, "gain": gain}
        for rank, (name, gain) in enumerate(ranking.entries[:count], start=1)
    ]
    width = max([len("feature")] + [len(entry["name"]) for entry in entries])
    return render("ranking.j2", dataset=dataset, bins=bins, entries=entries, width=width)


def render_evaluation(report: EvaluationReport) -> str:
    """Per-fold and aggregated metrics of a cross-validation run."""
    sizes = report.fold_sizes or (0,) * len(report.per_fold)
    folds = [
        {"number": number, "size": size, "metrics": metrics}
        for number, (size, metrics) in enumerate(zip(sizes, report.per_fold), start=1)
    ]
    undefined = sorted(
        {name for metrics in report.per_fold for name in metrics.undefined}
        | set(report.pooled.undefined)
    )
    return render(
        "evaluation.j2",
        algorithm=report.config.get("algorithm", ""),
        dataset=report.dataset or "the training set",
        k=report.k,
        seed=report.seed,
        threshold=report.threshold,
        positive_class=report.positive_class,
        folds=folds,
        aggregate=report.aggregate,
        pooled=report.pooled,
        by_positive_class=[
            (positive, report.by_positive_class[positive])
            for positive in (CLICKBAIT, LEGITIMATE)
            if positive in report.by_positive_class
        ],
        undefined=undefined,
    )


def evaluation_records(report: EvaluationReport, run_config: Dict) -> List[Dict]:
    """One record per fold, then the pooled and the aggregate record."""
    common = {
        "dataset": report.dataset,
        "k": report.k,
        "seed": report.seed,
        "threshold": report.threshold,
        "positive_class": report.positive_class,
        "train_config": report.config,
        "run_config": run_config,
    }
    records = []
    for number, metrics in enumerate(report.per_fold, start=1):
        record = {"record": "fold", "fold": number, "metrics": metrics.as_dict(), **common}
        if report.fold_sizes:
            record["size"] = report.fold_sizes[number - 1]
        records.append(record)
    records.append({"record": "pooled", "metrics": report.pooled.as_dict(), **common})
    records.append(
        {
            "record": "aggregate",
            "metrics": report.aggregate.as_dict(),
            "by_positive_class": {
                str(positive): metrics.as_dict()
                for positive, metrics in sorted(report.by_positive_class.items())
            },
            **common,
        }
    )
    return records


def write_evaluation(
    report: EvaluationReport, out_dir: Union[str, Path], run_config: Dict
) -> None:
    """Writes the evaluation table and its JSON Lines records into out_dir."""
    out_dir = Path(out_dir)
    _write_text(out_dir / EVALUATION_TXT, render_evaluation(report))
    _write_records(out_dir / EVALUATION_JSONL, evaluation_records(report, run_config))
    logger.info(f"wrote evaluation of {report.k} folds to {out_dir}")


def render_comparison(rows: Sequence[ComparisonRow], dataset: str = "") -> str:
    """Table of every algorithm and feature set, best mean AUC first."""
    k = rows[0].report.k if rows else 0
    seed = rows[0].report.seed if rows else 0
    return render(
        "comparison.j2",
        dataset=dataset or "the training set",
        k=k,
        seed=seed,
        rows=[
            {
                "algorithm": row.algorithm,
                "feature_set": row.feature_set,
                "metrics": row.report.aggregate,
            }
            for row in rows
        ],
    )


def write_comparison(
    rows: Sequence[ComparisonRow],
    out_dir: Union[str, Path],
    run_config: Dict,
    dataset: str = "",
) -> None:
    """Writes the comparison table and one JSON Lines record per row into out_dir."""
    out_dir = Path(out_dir)
    _write_text(out_dir / COMPARISON_TXT, render_comparison(rows, dataset))
    records = [
        {
            "rank": rank,
            "algorithm": row.algorithm,
            "feature_set": row.feature_set,
            "aggregate": row.report.aggregate.as_dict(),
            "pooled": row.report.pooled.as_dict(),
            "train_config": row.report.config,
            "run_config": run_config,
        }
        for rank, row in enumerate(rows, start=1)
    ]
    _write_records(out_dir / COMPARISON_JSONL, records)
    logger.info(f"wrote comparison of {len(rows)} configurations to {out_dir}")


def render_length_stats(length_stats: LengthStats) -> str:
    """Table of mean post title lengths per class."""
    return render(
        "length_stats.j2",
        dataset=length_stats.dataset or "the dataset",
        alpha=length_stats.alpha,
        rows=length_stats.rows,
    )


def write_length_stats(
    length_stats: LengthStats, out_dir: Union[str, Path], run_config: Dict
) -> None:
    """Writes the title length table and one JSON Lines record per unit into out_dir."""
    out_dir = Path(out_dir)
    _write_text(out_dir / LENGTH_STATS_TXT, render_length_stats(length_stats))
    records = [
        {
            "dataset": length_stats.dataset,
            "alpha": length_stats.alpha,
            "unit": row.unit,
            "clickbait_mean": row.clickbait_mean,
            "legitimate_mean": row.legitimate_mean,
            "clickbait_count": row.clickbait_count,
            "legitimate_count": row.legitimate_count,
            "t_p_value": row.t_p_value,
            "u_p_value": row.u_p_value,
            "significant": row.significant,
            "run_config": run_config,
        }
        for row in length_stats.rows
    ]
    _write_records(out_dir / LENGTH_STATS_JSONL, records)


def write_predictions(
    ids: Sequence[str],
    scores: Sequence[float],
    path: Union[str, Path],
    threshold: float = 0.5,
    run_config: Optional[Dict] = None,
) -> None:
    """Writes one `id,score,predicted` row per instance.

    `predicted` is 1 (clickbait) when the score reaches the threshold. With a run configuration,
    a JSON sidecar next to the table (`predictions.csv` gets `predictions.meta.json`) records it
    along with the threshold and the number of posts predicted clickbait.
    """
    scores = np.asarray(scores, dtype=np.float64)
    predicted = (scores >= threshold).astype(np.int64)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["id", "score", "predicted"])
        for instance_id, score, label in zip(ids, scores, predicted):
            writer.writerow([instance_id, repr(float(score)), int(label)])
    if run_config is not None:
        metadata = {
            "instances": len(scores),
            "predicted_clickbait": int(predicted.sum()),
            "threshold": threshold,
            "run_config": run_config,
        }
        with open(Path(path).with_suffix(".meta.json"), "w", encoding="utf-8") as file:
            file.write(json.dumps(metadata, indent=2, sort_keys=True))
            file.write("\n")
    logger.info(f"wrote {len(scores)} predictions to {path}")
