"""Depth-limited CART regression trees, the shared boosting base learner.

Splits greedily maximize the reduction in sum of squared errors. Ties are
broken deterministically toward the lowest feature index and then the lowest
threshold, so identical inputs always produce identical trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError


@dataclass
class _Node:
    # leaf when feature is None
    feature: int | None = None
    threshold: float = 0.0
    value: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    node_id: int = 0


class RegressionTree:
    """Binary CART with mean-valued leaves.

    Parameters
    ----------
    max_depth : int
        Maximum number of split levels (0 fits a single leaf).
    min_samples_leaf : int
        Minimum rows on each side of any split.
    """

    def __init__(self, max_depth: int = 3, min_samples_leaf: int = 5):
        if max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self._root: _Node | None = None
        self._n_nodes = 0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RegressionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        if X.shape[0] == 0:
            raise EmptyInputError("cannot fit a tree on zero rows")
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y row counts differ")
        self._n_nodes = 0
        self._root = self._build(X, y, depth=0)
        return self

    def _new_node(self) -> _Node:
        node = _Node(node_id=self._n_nodes)
        self._n_nodes += 1
        return node

    def _build(self, X: np.ndarray, y: np.ndarray, depth: int) -> _Node:
        node = self._new_node()
        node.value = float(y.mean())
        n = y.shape[0]
        if depth >= self.max_depth or n < 2 * self.min_samples_leaf:
            return node
        split = self._best_split(X, y)
        if split is None:
            return node
        j, thr = split
        mask = X[:, j] <= thr
        node.feature = j
        node.threshold = thr
        node.left = self._build(X[mask], y[mask], depth + 1)
        node.right = self._build(X[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, X: np.ndarray, y: np.ndarray):
        n = y.shape[0]
        msl = self.min_samples_leaf
        total_sum = y.sum()
        parent_sse = float(np.sum((y - y.mean()) ** 2))
        if parent_sse == 0.0:
            return None
        best_gain = 0.0
        best = None
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            ys = y[order]
            csum = np.cumsum(ys)
            csum2 = np.cumsum(ys**2)
            # candidate split after position i (the left-side row count)
            for i in range(msl, n - msl + 1):
                if xs[i - 1] == xs[i]:
                    continue  # cannot separate equal feature values
                left_sse = csum2[i - 1] - csum[i - 1] ** 2 / i
                right_cnt = n - i
                right_sum = total_sum - csum[i - 1]
                right_sse = (csum2[n - 1] - csum2[i - 1]) - right_sum**2 / right_cnt
                gain = parent_sse - (left_sse + right_sse)
                if gain > best_gain + 1e-15 * max(parent_sse, 1.0):
                    thr = 0.5 * (xs[i - 1] + xs[i])
                    best_gain = gain
                    best = (j, float(thr))
        return best

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        self._descend(self._root, X, np.arange(X.shape[0]), out, fill="value")
        return out

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node id reached by every row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0], dtype=int)
        self._descend(self._root, X, np.arange(X.shape[0]), out, fill="id")
        return out

    def _descend(self, node: _Node, X, idx, out, fill: str):
        if node.feature is None:
            out[idx] = node.value if fill == "value" else node.node_id
            return
        mask = X[idx, node.feature] <= node.threshold
        if mask.any():
            self._descend(node.left, X, idx[mask], out, fill)
        if (~mask).any():
            self._descend(node.right, X, idx[~mask], out, fill)

    def set_leaf_values(self, values: dict[int, float]) -> None:
        """Overwrite leaf predictions, keyed by leaf node id."""

        def visit(node: _Node):
            if node.feature is None:
                if node.node_id in values:
                    node.value = float(values[node.node_id])
                return
            visit(node.left)
            visit(node.right)

        visit(self._root)


def tree_fit(X, y, max_depth: int = 3, min_samples_leaf: int = 5) -> RegressionTree:
    return RegressionTree(max_depth=max_depth, min_samples_leaf=min_samples_leaf).fit(X, y)


def tree_predict(tree: RegressionTree, row) -> float:
    return float(tree.predict(np.atleast_2d(row))[0])
