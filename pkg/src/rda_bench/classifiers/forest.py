"""Random forest of Gini-split trees grown to purity on bootstrap samples.

Each split considers a random subset of sqrt(d) features; prediction is a
majority vote with ties going to the lowest class index. Training is fully
deterministic under the seed; the per-node threshold scans run on the
kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._kernels import gini_scan


@dataclass
class Tree:
    """Flat node arrays; node 0 is the root, leaves have feature == -1."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[int] = field(default_factory=list)

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(-1)
        return len(self.feature) - 1

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                if row[self.feature[node]] > self.threshold[node]:
                    node = self.right[node]
                else:
                    node = self.left[node]
            out[i] = self.value[node]
        return out


@dataclass
class ForestModel:
    trees: list[Tree]
    n_classes: int
    seed: int
    max_features: int

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        for tree in self.trees:
            codes = tree.predict_codes(X)
            votes[np.arange(X.shape[0]), codes] += 1
        return np.argmax(votes, axis=1)

    def vote_fractions(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            codes = tree.predict_codes(X)
            votes[np.arange(X.shape[0]), codes] += 1.0
        return votes / max(len(self.trees), 1)


def _majority(codes: np.ndarray, n_classes: int) -> int:
    return int(np.argmax(np.bincount(codes, minlength=n_classes)))


def _grow_tree(X: np.ndarray, codes: np.ndarray, n_classes: int,
               max_features: int, rng: np.random.Generator) -> Tree:
    tree = Tree()
    root = tree.add_node()
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        node_codes = codes[rows]
        if np.all(node_codes == node_codes[0]):
            tree.value[node] = int(node_codes[0])
            continue
        feats = np.sort(rng.choice(X.shape[1], size=max_features, replace=False))
        best_imp = np.inf
        best = None
        for j in feats:
            order = np.argsort(X[rows, j], kind="stable")
            xs = np.ascontiguousarray(X[rows[order], j])
            imp, m = gini_scan(xs, np.ascontiguousarray(node_codes[order]), n_classes)
            if m > 0 and imp < best_imp:
                best_imp = imp
                best = (int(j), order, m, xs)
        if best is None:
            # duplicate rows with conflicting labels: majority leaf
            tree.value[node] = _majority(node_codes, n_classes)
            continue
        j, order, m, xs = best
        tree.feature[node] = j
        tree.threshold[node] = 0.5 * (xs[m - 1] + xs[m])
        left_id = tree.add_node()
        right_id = tree.add_node()
        tree.left[node] = left_id
        tree.right[node] = right_id
        stack.append((left_id, rows[order[:m]]))
        stack.append((right_id, rows[order[m:]]))
    return tree


def rf_train(X: np.ndarray, codes: np.ndarray, n_classes: int, n_trees: int = 100,
             max_features: int | None = None, seed: int = 0) -> ForestModel:
    """Grow n_trees Gini trees on bootstrap resamples of (X, codes)."""
    X = np.asarray(X, dtype=np.float64)
    codes = np.asarray(codes, dtype=np.int64)
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if max_features is None:
        max_features = max(1, int(round(np.sqrt(d))))
    max_features = min(max_features, d)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
        rows = rng.integers(0, n, n)
        trees.append(_grow_tree(X[rows], codes[rows], n_classes, max_features, rng))
    return ForestModel(trees=trees, n_classes=n_classes, seed=seed, max_features=max_features)
