"""Random-forest regression built on greedy CART trees.

Trees grow on bootstrap resamples, choosing at each node the
(feature, threshold) split that minimizes the summed squared deviation of
the children, over a random feature subset. Thresholds are midpoints
between consecutive distinct sorted values; forest predictions are the
unweighted mean over trees.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InsufficientDataError


@dataclass
class TreeNode:
    value: float  # leaf mean (also kept for internal nodes)
    count: int
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class RegressionTree:
    root: TreeNode
    n_features: int

    def predict(self, x: np.ndarray) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict(row) for row in np.atleast_2d(X)])

    def flatten(self) -> list[dict]:
        """Breadth-first node array for serialization."""
        nodes, queue = [], [(self.root, 0)]
        next_id = 1
        while queue:
            node, nid = queue.pop(0)
            entry = {"id": nid, "kind": "leaf" if node.is_leaf else "split",
                     "value": node.value, "count": node.count}
            if not node.is_leaf:
                entry.update(feature=node.feature, threshold=node.threshold,
                             left=next_id, right=next_id + 1)
                queue.append((node.left, next_id))
                queue.append((node.right, next_id + 1))
                next_id += 2
            nodes.append(entry)
        return nodes

    @classmethod
    def from_flat(cls, nodes: list[dict], n_features: int) -> "RegressionTree":
        byid = {e["id"]: e for e in nodes}

        def build(nid: int) -> TreeNode:
            e = byid[nid]
            node = TreeNode(e["value"], e["count"])
            if e["kind"] == "split":
                node.feature = e["feature"]
                node.threshold = e["threshold"]
                node.left = build(e["left"])
                node.right = build(e["right"])
            return node

        return cls(build(0), n_features)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None  # None = grow to the largest possible size
    min_samples_leaf: int = 1
    features_per_split: int | None = None  # None = ceil(d/3)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.min_samples_leaf < 1:
            raise ValueError("n_trees and min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass(frozen=True)
class Forest:
    trees: tuple[RegressionTree, ...]
    config: ForestConfig
    tree_seeds: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "config": {
                "n_trees": self.config.n_trees,
                "max_depth": self.config.max_depth,
                "min_samples_leaf": self.config.min_samples_leaf,
                "features_per_split": self.config.features_per_split,
                "bootstrap": self.config.bootstrap,
                "seed": self.config.seed,
            },
            "tree_seeds": list(self.tree_seeds),
            "n_features": self.trees[0].n_features,
            "trees": [t.flatten() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Forest":
        cfg = ForestConfig(**d["config"])
        trees = tuple(
            RegressionTree.from_flat(nodes, d["n_features"]) for nodes in d["trees"]
        )
        return cls(trees, cfg, tuple(d["tree_seeds"]))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Forest":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _best_split(X, y, features, min_leaf):
    """Lowest-SSE (feature, threshold) over candidates, or None.

    Candidates and features are scanned in ascending order so the first
    strict improvement wins, giving the lowest-index/lowest-threshold tie
    break for free.
    """
    n = len(y)
    best = None  # (sse, feature, threshold)
    for feat in features:
        vals = X[:, feat]
        order = np.argsort(vals, kind="stable")
        vs, ys = vals[order], y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum, total_sq = csum[-1], csq[-1]
        ks = np.arange(min_leaf, n - min_leaf + 1)
        if len(ks) == 0:
            continue
        distinct = vs[ks - 1] < vs[ks]
        ks = ks[distinct]
        if len(ks) == 0:
            continue
        left_sse = csq[ks - 1] - csum[ks - 1] ** 2 / ks
        right_sum = total_sum - csum[ks - 1]
        right_sse = (total_sq - csq[ks - 1]) - right_sum**2 / (n - ks)
        sse = left_sse + right_sse
        k = int(np.argmin(sse))
        if best is None or sse[k] < best[0]:
            best = (float(sse[k]), int(feat), float((vs[ks[k] - 1] + vs[ks[k]]) / 2.0))
    return best


def _grow(X, y, depth, config, k_features, rng) -> TreeNode:
    n = len(y)
    mean = float(y.mean())
    node = TreeNode(mean, n)
    sse_here = float(np.sum((y - mean) ** 2))
    depth_cap = config.max_depth is not None and depth >= config.max_depth
    if depth_cap or n < 2 * config.min_samples_leaf or sse_here <= 1e-15:
        return node
    d = X.shape[1]
    if k_features < d:
        feats = np.sort(rng.choice(d, size=k_features, replace=False))
    else:
        feats = np.arange(d)
    best = _best_split(X, y, feats, config.min_samples_leaf)
    if best is None:
        return node
    _, feat, thr = best
    mask = X[:, feat] <= thr
    node.feature = feat
    node.threshold = thr
    node.left = _grow(X[mask], y[mask], depth + 1, config, k_features, rng)
    node.right = _grow(X[~mask], y[~mask], depth + 1, config, k_features, rng)
    return node


def fit_tree(
    X: np.ndarray, y: np.ndarray, config: ForestConfig, rng: np.random.Generator
) -> RegressionTree:
    """Grow one CART regression tree; rng drives feature subsampling."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise InsufficientDataError("empty training set")
    d = X.shape[1]
    k = config.features_per_split or max(1, math.ceil(d / 3))
    if not 1 <= k <= d:
        raise DimensionError(f"features_per_split {k} outside [1, {d}]")
    return RegressionTree(_grow(X, y, 0, config, k, rng), d)


def fit_forest(X: np.ndarray, y: np.ndarray, config: ForestConfig) -> Forest:
    """Train n_trees CART trees, each on its own seeded bootstrap resample."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise InsufficientDataError("empty training set")
    master = np.random.default_rng(config.seed)
    tree_seeds = tuple(int(s) for s in master.integers(0, 2**63, config.n_trees))
    trees = []
    n = len(y)
    for ts in tree_seeds:
        rng = np.random.default_rng(ts)
        if config.bootstrap:
            idx = rng.integers(0, n, n)
            trees.append(fit_tree(X[idx], y[idx], config, rng))
        else:
            trees.append(fit_tree(X, y, config, rng))
    return Forest(tuple(trees), config, tree_seeds)


def predict_forest(forest: Forest, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (forest.trees[0].n_features,):
        raise DimensionError(f"expected {forest.trees[0].n_features} features")
    return float(np.mean([t.predict(x) for t in forest.trees]))


def predict_forest_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    preds = np.stack([t.predict_batch(X) for t in forest.trees])
    return preds.mean(axis=0)


def tree_training_loss(tree: RegressionTree, X: np.ndarray, y: np.ndarray) -> float:
    """Total squared error of the tree on its training data."""
    return float(np.sum((tree.predict_batch(X) - np.asarray(y, dtype=float)) ** 2))
