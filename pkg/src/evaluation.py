# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Cross-validation, classification metrics, classifier comparison and title length statistics."""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from constants import CLICKBAIT, LEGITIMATE
from corpus import Dataset
from matrix import FeatureMatrix
from models import TrainConfig, predict_matrix, train
from selection import GainRanking, resolve_features
from textstats import len_characters, len_words

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 10
DEFAULT_THRESHOLD = 0.5
DEFAULT_ALPHA = 0.05


class EvaluationDomainError(ValueError):
    """Exception raised when an evaluation operation is called outside its domain."""


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index of every instance."""

    assignments: np.ndarray
    k: int
    seed: int

    def split(self, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """Training and held-out row indices of one fold."""
        held_out = self.assignments == fold
        return np.flatnonzero(~held_out), np.flatnonzero(held_out)

    def sizes(self) -> List[int]:
        """Number of instances per fold."""
        return np.bincount(self.assignments, minlength=self.k).tolist()


@dataclass(frozen=True)
class MetricSet:
    """Ranking and threshold metrics of one set of scores.

    `undefined` names the metrics whose denominator was empty; those are reported as 0.
    """

    auc: float
    accuracy: float
    precision: float
    recall: float
    undefined: Tuple[str, ...] = ()

    def as_dict(self) -> Dict:
        """Plain dictionary form."""
        values = asdict(self)
        values["undefined"] = list(self.undefined)
        return values


@dataclass(frozen=True)
class EvaluationReport:
    """Outcome of a cross-validation run."""

    per_fold: Tuple[MetricSet, ...]
    aggregate: MetricSet
    pooled: MetricSet
    by_positive_class: Dict[int, MetricSet]
    config: Dict
    dataset: str
    k: int
    seed: int
    threshold: float
    positive_class: int
    fold_sizes: Tuple[int, ...] = field(default=())


def make_folds(labels: Sequence[int], k: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
    """Stratified, seeded assignment of instances to k folds.

    Each class is shuffled and dealt round-robin, the negatives continuing where the positives
    stopped, so fold sizes and per-fold positive counts both differ by at most one.

    Raises:
        EvaluationDomainError: when k < 2 or k exceeds the number of instances.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise EvaluationDomainError(f"need at least 2 folds, got {k}")
    if k > labels.size:
        raise EvaluationDomainError(f"{k} folds for {labels.size} instances")

    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.size, dtype=np.int64)
    dealt = 0
    for label in (CLICKBAIT, LEGITIMATE):
        members = rng.permutation(np.flatnonzero(labels == label))
        assignments[members] = (dealt + np.arange(members.size)) % k
        dealt += members.size
    return FoldPlan(assignments=assignments, k=k, seed=seed)


def _check_both_classes(labels: np.ndarray) -> None:
    if labels.size == 0 or labels.min() == labels.max():
        raise EvaluationDomainError("AUC needs both classes")


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve from the Mann-Whitney rank sum; tied scores count one half.

    Raises:
        EvaluationDomainError: when labels hold a single class or lengths differ.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise EvaluationDomainError(f"{scores.size} scores for {labels.size} labels")
    _check_both_classes(labels)
    ranks = stats.rankdata(scores)
    positives = labels == CLICKBAIT
    n_positive = int(positives.sum())
    n_negative = labels.size - n_positive
    rank_sum = ranks[positives].sum()
    return float((rank_sum - n_positive * (n_positive + 1) / 2) / (n_positive * n_negative))


def threshold_metrics(
    scores: Sequence[float],
    labels: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
    positive_class: int = CLICKBAIT,
) -> Tuple[float, float, float, Tuple[str, ...]]:
    """Accuracy, precision and recall of thresholded scores.

    With positive_class 1 a score at or above the threshold predicts clickbait; with
    positive_class 0 a score below the threshold predicts the legitimate class, which is then
    the class precision and recall are measured for.

    Returns:
        (accuracy, precision, recall, names of metrics with an empty denominator)
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.size == 0 or scores.shape != labels.shape:
        raise EvaluationDomainError(f"{scores.size} scores for {labels.size} labels")
    if not 0 <= threshold <= 1:
        raise EvaluationDomainError(f"threshold must be within [0, 1], got {threshold}")
    if positive_class not in (CLICKBAIT, LEGITIMATE):
        raise EvaluationDomainError(f"positive class must be 0 or 1, got {positive_class}")

    if positive_class == CLICKBAIT:
        predicted = scores >= threshold
    else:
        predicted = scores < threshold
    actual = labels == positive_class

    true_positives = int(np.sum(predicted & actual))
    accuracy = float(np.mean(predicted == actual))
    undefined = []
    if predicted.sum():
        precision = true_positives / int(predicted.sum())
    else:
        precision = 0.0
        undefined.append("precision")
    if actual.sum():
        recall = true_positives / int(actual.sum())
    else:
        recall = 0.0
        undefined.append("recall")
    return accuracy, float(precision), float(recall), tuple(undefined)


def metric_set(
    scores: Sequence[float], labels: Sequence[int], threshold: float, positive_class: int
) -> MetricSet:
    """AUC plus threshold metrics."""
    accuracy, precision, recall, undefined = threshold_metrics(
        scores, labels, threshold, positive_class
    )
    return MetricSet(auc(scores, labels), accuracy, precision, recall, undefined)


def mean_metrics(metrics: Sequence[MetricSet]) -> MetricSet:
    """Field-wise arithmetic mean."""
    undefined = sorted({name for metric in metrics for name in metric.undefined})
    return MetricSet(
        auc=float(np.mean([metric.auc for metric in metrics])),
        accuracy=float(np.mean([metric.accuracy for metric in metrics])),
        precision=float(np.mean([metric.precision for metric in metrics])),
        recall=float(np.mean([metric.recall for metric in metrics])),
        undefined=tuple(undefined),
    )


def cross_validate(
    matrix: FeatureMatrix,
    train_config: TrainConfig,
    k: int = DEFAULT_FOLDS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    positive_class: int = CLICKBAIT,
    threads: int = 1,
    dataset: str = "",
) -> EvaluationReport:
    """Trains on k - 1 folds and scores the held-out fold, for every fold.

    The aggregate is the mean of the per-fold metrics; pooled metrics are computed once over
    all out-of-fold scores. Threshold metrics are also aggregated for both positive classes.

    Raises:
        EvaluationDomainError: when the matrix is unlabeled or a class is smaller than k.
    """
    if not matrix.labeled:
        raise EvaluationDomainError("cross-validation needs a labeled feature matrix")
    if positive_class not in (CLICKBAIT, LEGITIMATE):
        raise EvaluationDomainError(f"positive class must be 0 or 1, got {positive_class}")
    labels = matrix.labels
    smallest = min(int(np.sum(labels == CLICKBAIT)), int(np.sum(labels == LEGITIMATE)))
    if smallest < k:
        raise EvaluationDomainError(
            f"every fold needs both classes: the smaller class has {smallest} instances "
            f"for {k} folds"
        )
    plan = make_folds(labels, k, seed)
    config = train_config.resolved()

    def run_fold(fold: int) -> np.ndarray:
        train_rows, test_rows = plan.split(fold)
        model = train(matrix.take(train_rows), config)
        return predict_matrix(model, matrix.take(test_rows))

    if threads > 1:
        fold_scores = Parallel(n_jobs=threads, backend="threading")(
            delayed(run_fold)(fold) for fold in range(k)
        )
    else:
        fold_scores = [run_fold(fold) for fold in range(k)]

    out_of_fold = np.empty(len(matrix), dtype=np.float64)
    per_class: Dict[int, List[MetricSet]] = {CLICKBAIT: [], LEGITIMATE: []}
    per_fold = []
    for fold, scores in enumerate(fold_scores):
        _, test_rows = plan.split(fold)
        out_of_fold[test_rows] = scores
        for positive in per_class:
            per_class[positive].append(metric_set(scores, labels[test_rows], threshold, positive))
        per_fold.append(per_class[positive_class][-1])
        logger.info(f"fold {fold + 1}/{k}: AUC {per_fold[-1].auc:.4f}")

    report = EvaluationReport(
        per_fold=tuple(per_fold),
        aggregate=mean_metrics(per_fold),
        pooled=metric_set(out_of_fold, labels, threshold, positive_class),
        by_positive_class={
            positive: mean_metrics(metrics) for positive, metrics in per_class.items()
        },
        config=config.as_dict(),
        dataset=dataset,
        k=k,
        seed=seed,
        threshold=threshold,
        positive_class=positive_class,
        fold_sizes=tuple(plan.sizes()),
    )
    logger.info(f"{config.algorithm}: mean AUC {report.aggregate.auc:.4f} over {k} folds")
    return report


@dataclass(frozen=True)
class ComparisonRow:
    """Cross-validation outcome of one algorithm on one feature set."""

    algorithm: str
    feature_set: str
    report: EvaluationReport


def compare_classifiers(
    matrix: FeatureMatrix,
    ranking: Optional[GainRanking],
    algorithms: Sequence[str],
    feature_sets: Sequence[str],
    base_config: TrainConfig,
    k: int = DEFAULT_FOLDS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    positive_class: int = CLICKBAIT,
    threads: int = 1,
) -> List[ComparisonRow]:
    """Cross-validates every algorithm on every feature set ("all" or "top:k").

    Rows are sorted by mean AUC, then accuracy, best first, then by algorithm name.
    """
    rows = []
    for feature_set in feature_sets:
        subset = resolve_features(feature_set, ranking)
        for algorithm in algorithms:
            config = replace(
                base_config,
                algorithm=algorithm,
                feature_subset=None if subset is None else tuple(subset),
            )
            report = cross_validate(matrix, config, k, seed, threshold, positive_class, threads)
            rows.append(ComparisonRow(algorithm=algorithm, feature_set=feature_set, report=report))
    rows.sort(
        key=lambda row: (-row.report.aggregate.auc, -row.report.aggregate.accuracy, row.algorithm)
    )
    return rows


@dataclass(frozen=True)
class SignificanceResult:
    """Two-sided p-values of Welch's t-test and the Mann-Whitney U test."""

    t_p_value: float
    u_p_value: float


def significance_test(
    sample_a: Sequence[float], sample_b: Sequence[float]
) -> SignificanceResult:
    """Tests whether two samples differ in location.

    The U test uses the normal approximation with tie correction and no continuity correction.

    Raises:
        EvaluationDomainError: naming the test that cannot run on the samples.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise EvaluationDomainError("t-test needs at least 2 values per sample")
    if np.var(a) == 0 and np.var(b) == 0:
        raise EvaluationDomainError("t-test needs a sample with non-zero variance")
    if np.ptp(np.concatenate([a, b])) == 0:
        raise EvaluationDomainError("U test needs at least two distinct values")

    t_result = stats.ttest_ind(a, b, equal_var=False)
    u_result = stats.mannwhitneyu(
        a, b, use_continuity=False, alternative="two-sided", method="asymptotic"
    )
    return SignificanceResult(t_p_value=float(t_result.pvalue), u_p_value=float(u_result.pvalue))


@dataclass(frozen=True)
class LengthRow:
    """Mean post title length per class for one unit, with its significance."""

    unit: str
    clickbait_mean: float
    legitimate_mean: float
    clickbait_count: int
    legitimate_count: int
    t_p_value: Optional[float]
    u_p_value: Optional[float]
    significant: Optional[bool]


@dataclass(frozen=True)
class LengthStats:
    """Post title length measures of a dataset."""

    dataset: str
    alpha: float
    rows: Tuple[LengthRow, ...]

    def row(self, unit: str) -> LengthRow:
        """Row for "characters" or "words"."""
        for row in self.rows:
            if row.unit == unit:
                return row
        raise KeyError(unit)


def title_length_stats(dataset: Dataset, alpha: float = DEFAULT_ALPHA) -> LengthStats:
    """Mean character and word counts of post titles per class, skipping posts without a title.

    Raises:
        EvaluationDomainError: when the dataset is unlabeled or a class has no titled post.
    """
    if not dataset.labeled:
        raise EvaluationDomainError("title length statistics need a labeled dataset")

    samples = {unit: {CLICKBAIT: [], LEGITIMATE: []} for unit in ("characters", "words")}
    for instance, label in zip(dataset.instances, dataset.label_values):
        if instance.post_title is None:
            continue
        samples["characters"][label].append(len_characters(instance.post_title))
        samples["words"][label].append(len_words(instance.post_title))

    for positive, name in ((CLICKBAIT, "clickbait"), (LEGITIMATE, "legitimate")):
        if not samples["characters"][positive]:
            raise EvaluationDomainError(f"no {name} post has a title")

    rows = []
    for unit, by_class in samples.items():
        try:
            result = significance_test(by_class[CLICKBAIT], by_class[LEGITIMATE])
            t_p, u_p = result.t_p_value, result.u_p_value
            significant = bool(t_p < alpha and u_p < alpha)
        except EvaluationDomainError as err:
            logger.warning(f"no significance test for title {unit}: {err}")
            t_p = u_p = significant = None
        rows.append(
            LengthRow(
                unit=unit,
                clickbait_mean=float(np.mean(by_class[CLICKBAIT])),
                legitimate_mean=float(np.mean(by_class[LEGITIMATE])),
                clickbait_count=len(by_class[CLICKBAIT]),
                legitimate_count=len(by_class[LEGITIMATE]),
                t_p_value=t_p,
                u_p_value=u_p,
                significant=significant,
            )
        )
    return LengthStats(dataset=dataset.name, alpha=alpha, rows=tuple(rows))
