# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Binary CART trees over presorted feature columns.

One builder serves classification and regression. Targets are real numbers with non-negative
sample weights; a split maximizes S_L^2 / W_L + S_R^2 / W_R, where S is the weighted target sum
and W the weight of a child. For 0/1 targets this is the weighted Gini criterion, for real
targets it is the squared error criterion. Leaves hold the weighted mean target.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeNode:
    """A split on `feature <= threshold` (left) versus above (right), or a leaf with a score."""

    score: Optional[float] = None
    feature: Optional[str] = None
    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        """Whether the node is a leaf."""
        return self.feature is None

    @property
    def depth(self) -> int:
        """Number of split levels below and including this node."""
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth, self.right.depth)

    def leaves(self) -> int:
        """Number of leaves."""
        if self.is_leaf:
            return 1
        return self.left.leaves() + self.right.leaves()

    def predict(self, values: np.ndarray) -> np.ndarray:
        """Leaf scores of every row of a 2-D array whose columns follow the feature indices."""
        values = np.asarray(values, dtype=np.float64)
        scores = np.empty(values.shape[0], dtype=np.float64)
        self._route(values, np.arange(values.shape[0]), scores)
        return scores

    def _route(self, values: np.ndarray, rows: np.ndarray, scores: np.ndarray) -> None:
        if self.is_leaf:
            scores[rows] = self.score
            return
        goes_left = values[rows, self.feature_index] <= self.threshold
        self.left._route(values, rows[goes_left], scores)
        self.right._route(values, rows[~goes_left], scores)


@dataclass(frozen=True)
class Split:
    """Best split found for a node."""

    feature_index: int
    threshold: float
    gain: float
    goes_left: np.ndarray


FeatureSampler = Callable[[int], np.ndarray]


class TreeBuilder:
    """Grows CART trees of bounded depth on one training set.

    Columns are sorted once; a node recovers its sorted members from the global order with a
    boolean mask, so split search is linear in the node size for every feature.

    A node is split whenever its targets differ and some threshold leaves at least `min_leaf`
    rows on both sides, even if the split does not lower impurity. Ties between equally good
    splits go to the lowest feature index, then the lowest threshold.
    """

    def __init__(
        self,
        values: np.ndarray,
        feature_names: Sequence[str],
        max_depth: int,
        min_leaf: int,
    ):
        self.values = np.asarray(values, dtype=np.float64)
        self.feature_names = list(feature_names)
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.order = np.argsort(self.values, axis=0, kind="stable")

    def build(
        self,
        targets: np.ndarray,
        weights: Optional[np.ndarray] = None,
        feature_sampler: Optional[FeatureSampler] = None,
    ) -> TreeNode:
        """Grows one tree.

        Args:
            targets: target value per row.
            weights: non-negative weight per row, ones when omitted. Rows of weight 0 are left
                out of the tree.
            feature_sampler: given the number of features, returns the sorted indices a split
                may use; every feature when omitted.
        """
        targets = np.asarray(targets, dtype=np.float64)
        if weights is None:
            weights = np.ones_like(targets)
        weights = np.asarray(weights, dtype=np.float64)
        return self._grow(weights > 0, targets, weights, feature_sampler, 0)

    def _grow(self, members, targets, weights, feature_sampler, depth) -> TreeNode:
        node_targets = targets[members]
        node_weights = weights[members]
        total_weight = node_weights.sum()
        score = float(np.dot(node_weights, node_targets) / total_weight)

        if depth >= self.max_depth or np.ptp(node_targets) == 0:
            return TreeNode(score=score)

        features = None if feature_sampler is None else feature_sampler(self.values.shape[1])
        split = self.find_split(members, targets, weights, features)
        if split is None:
            return TreeNode(score=score)

        left_members = members.copy()
        left_members[members] = split.goes_left
        right_members = members & ~left_members
        return TreeNode(
            feature=self.feature_names[split.feature_index],
            feature_index=split.feature_index,
            threshold=split.threshold,
            left=self._grow(left_members, targets, weights, feature_sampler, depth + 1),
            right=self._grow(right_members, targets, weights, feature_sampler, depth + 1),
        )

    def find_split(
        self,
        members: np.ndarray,
        targets: np.ndarray,
        weights: np.ndarray,
        features: Optional[np.ndarray] = None,
    ) -> Optional[Split]:
        """Best split of the member rows, or None when no threshold satisfies `min_leaf`."""
        size = int(members.sum())
        if size < 2 * self.min_leaf:
            return None
        if features is None:
            features = np.arange(self.values.shape[1])

        # Member rows of every candidate feature, in ascending feature value.
        order = self.order[:, features].T
        rows = order[members[order]].reshape(len(features), size)
        sorted_values = self.values[rows, features[:, None]]
        sorted_weights = weights[rows]
        left_weight = np.cumsum(sorted_weights, axis=1)[:, :-1]
        left_sum = np.cumsum(sorted_weights * targets[rows], axis=1)[:, :-1]
        total_weight = left_weight[0, -1] + sorted_weights[0, -1]
        total_sum = left_sum[0, -1] + sorted_weights[0, -1] * targets[rows[0, -1]]

        # Position p puts the first p + 1 sorted rows on the left.
        left_count = np.arange(1, size)
        valid = (
            (sorted_values[:, :-1] < sorted_values[:, 1:])
            & (left_count >= self.min_leaf)
            & (size - left_count >= self.min_leaf)
        )
        right_weight = total_weight - left_weight
        valid &= (left_weight > 0) & (right_weight > 0)
        if not valid.any():
            return None

        with np.errstate(divide="ignore", invalid="ignore"):
            objective = left_sum**2 / left_weight + (total_sum - left_sum) ** 2 / right_weight
        objective = np.where(valid, objective, -np.inf)
        best = int(np.argmax(objective))
        candidate, position = divmod(best, size - 1)

        lower = sorted_values[candidate, position]
        upper = sorted_values[candidate, position + 1]
        threshold = (lower + upper) / 2
        if not lower <= threshold < upper:
            threshold = lower

        feature_index = int(features[candidate])
        goes_left = self.values[members, feature_index] <= threshold
        gain = float(objective[candidate, position] - total_sum**2 / total_weight)
        return Split(
            feature_index=feature_index, threshold=float(threshold), gain=gain, goes_left=goes_left
        )
