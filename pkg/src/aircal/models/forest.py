"""Bagged regression trees grown by exact greedy variance reduction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat array tree; ``feature == -1`` marks a leaf. Rows go left when
    ``x[feature] <= threshold``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] >= 0
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active[r] = self.feature[node[r]] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _best_split(Xn: np.ndarray, yn: np.ndarray, min_leaf: int):
    """Return (gain, feature, threshold) of the best split or None.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    m, d = Xn.shape
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    ys = yn[order]
    left_sum = np.cumsum(ys, axis=0)[:-1]
    total = left_sum[-1] + ys[-1]
    n_left = np.arange(1, m, dtype=np.float64)[:, None]
    gain = left_sum ** 2 / n_left + (total - left_sum) ** 2 / (m - n_left) - total ** 2 / m
    valid = xs[:-1] < xs[1:]
    if min_leaf > 1:
        k = np.arange(1, m)[:, None]
        valid &= (k >= min_leaf) & (m - k >= min_leaf)
    gain = np.where(valid, gain, -np.inf)
    pos = np.argmax(gain, axis=0)
    col_best = gain[pos, np.arange(d)]
    j = int(np.argmax(col_best))
    best = col_best[j]
    if not np.isfinite(best) or best <= 0.0:
        return None
    k = pos[j]
    lo, hi = xs[k, j], xs[k + 1, j]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return best, j, thr


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None = None, min_samples_leaf: int = 1) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        if np.all(yn == yn[0]):
            value[node] = float(yn[0])
            continue
        value[node] = float(yn.mean())
        if idx.size < 2 * min_samples_leaf or (max_depth is not None and depth >= max_depth):
            continue
        # centring keeps the cumulative sums well conditioned
        split = _best_split(X[idx], yn - value[node], min_samples_leaf)
        if split is None:
            continue
        _, j, thr = split
        mask = X[idx, j] <= thr
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = j, thr, lnode, rnode
        stack.append((rnode, idx[~mask], depth + 1))
        stack.append((lnode, idx[mask], depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(value))


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[Tree, ...]
    y_min: float
    y_max: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        # the clip only removes summation rounding; each tree is a mean of labels
        return np.clip(total / len(self.trees), self.y_min, self.y_max)


def fit_forest(X: np.ndarray, y: np.ndarray, n_trees: int = 10, bootstrap: bool = True,
               max_depth: int | None = None, min_samples_leaf: int = 1, seed: int = 0) -> Forest:
    """Tree ``i`` draws its bootstrap sample from ``default_rng(seed + i)``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    trees = []
    for i in range(n_trees):
        if bootstrap:
            rows = np.random.default_rng(seed + i).integers(0, n, n)
        else:
            rows = np.arange(n)
        trees.append(grow_tree(X[rows], y[rows], max_depth, min_samples_leaf))
    return Forest(tuple(trees), float(y.min()), float(y.max()))
