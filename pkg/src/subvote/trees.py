"""Built-in base learners: a CART decision tree and a bagged random forest.

Both are deliberately minimal classifiers over float feature matrices with
integer labels; they exist so the voting layer has deterministic, seedable
hypotheses with no external model dependency. Hot loops live in
:mod:`subvote._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidParameterError

_NO_DEPTH_LIMIT = 10**9

FEATURE_RULES = ("sqrt", "2sqrt", "all")


def resolve_mtry(rule: str, k: int) -> int:
    """Features examined per split under a named rule, relative to the
    hypothesis's own feature count k (not the global count)."""
    if k < 1:
        raise InvalidParameterError(f"need k >= 1, got {k}")
    if rule == "sqrt":
        return max(1, min(k, round(math.sqrt(k))))
    if rule == "2sqrt":
        return max(1, min(k, round(2 * math.sqrt(k))))
    if rule == "all":
        return k
    raise InvalidParameterError(f"unknown feature rule {rule!r}; pick from {FEATURE_RULES}")


def _validate_xy(X, y, n_classes):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise InvalidParameterError("X must be (m, k) and y (m,) with matching m")
    if X.shape[0] == 0:
        raise InvalidParameterError("cannot fit on an empty dataset")
    if y.min() < 0 or y.max() >= n_classes:
        raise InvalidParameterError(
            f"labels must lie in [0, {n_classes}), got range "
            f"[{int(y.min())}, {int(y.max())}]"
        )
    return X, y


@dataclass
class TreeArrays:
    """Flat array encoding of a fitted tree (feature < 0 marks a leaf)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf: np.ndarray

    def predict_nodes(self, X) -> np.ndarray:
        return _kernels.predict_tree(
            self.feature, self.threshold, self.left, self.right, self.leaf, X
        )

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf": self.leaf.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeArrays":
        return cls(
            feature=np.asarray(d["feature"], np.int64),
            threshold=np.asarray(d["threshold"], np.float64),
            left=np.asarray(d["left"], np.int64),
            right=np.asarray(d["right"], np.int64),
            leaf=np.asarray(d["leaf"], np.int64),
        )


def fit_tree_arrays(
    X, y, n_classes, mtry, max_depth, min_leaf, seed, bootstrap
) -> TreeArrays:
    """Grow one tree; bootstrap resampling and feature draws both come from
    the counter-based stream of ``seed`` so results are reproducible on
    either kernel path."""
    m = X.shape[0]
    if bootstrap:
        samples = (_kernels.draw_block(seed, 0, m) % np.uint64(m)).astype(np.int64)
        counter0 = m
    else:
        samples = np.arange(m, dtype=np.int64)
        counter0 = 0
    depth = _NO_DEPTH_LIMIT if max_depth is None else int(max_depth)
    f, t, l, r, v, _ = _kernels.build_tree(
        X, samples, y, n_classes, mtry, depth, min_leaf, seed, counter0
    )
    return TreeArrays(f, t, l, r, v)


class DecisionTree:
    """Single CART tree with Gini impurity; considers every feature at each split."""

    kind = "decision_tree"

    def __init__(self, max_depth=None, min_leaf: int = 1, seed: int = 0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.n_classes: int | None = None
        self.tree_: TreeArrays | None = None

    def fit(self, X, y, n_classes: int):
        X, y = _validate_xy(X, y, n_classes)
        self.n_classes = n_classes
        self.tree_ = fit_tree_arrays(
            X, y, n_classes, X.shape[1], self.max_depth, self.min_leaf,
            self.seed, bootstrap=False,
        )
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return self.tree_.predict_nodes(X)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
            "n_classes": self.n_classes,
            "tree": self.tree_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        obj = cls(max_depth=d["max_depth"], min_leaf=d["min_leaf"], seed=d["seed"])
        obj.n_classes = d["n_classes"]
        obj.tree_ = TreeArrays.from_dict(d["tree"])
        return obj


class RandomForest:
    """Bagged CART trees with per-split feature subsampling.

    ``max_features`` is one of the named rules of :func:`resolve_mtry`;
    resolved against the number of columns the forest is actually fit on.
    """

    kind = "random_forest"

    def __init__(
        self,
        n_trees: int = 20,
        max_features: str = "sqrt",
        max_depth=None,
        min_leaf: int = 1,
        seed: int = 0,
    ):
        if n_trees < 1:
            raise InvalidParameterError(f"need n_trees >= 1, got {n_trees}")
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.n_classes: int | None = None
        self.trees_: list[TreeArrays] = []

    def fit(self, X, y, n_classes: int):
        X, y = _validate_xy(X, y, n_classes)
        self.n_classes = n_classes
        mtry = resolve_mtry(self.max_features, X.shape[1])
        self.trees_ = []
        for t in range(self.n_trees):
            tree_seed = _kernels.draw(self.seed, t)
            self.trees_.append(
                fit_tree_arrays(
                    X, y, n_classes, mtry, self.max_depth, self.min_leaf,
                    tree_seed, bootstrap=True,
                )
            )
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], self.n_classes), np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            votes[rows, tree.predict_nodes(X)] += 1
        return np.argmax(votes, axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
            "n_classes": self.n_classes,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForest":
        obj = cls(
            n_trees=d["n_trees"],
            max_features=d["max_features"],
            max_depth=d["max_depth"],
            min_leaf=d["min_leaf"],
            seed=d["seed"],
        )
        obj.n_classes = d["n_classes"]
        obj.trees_ = [TreeArrays.from_dict(t) for t in d["trees"]]
        return obj


class ConstantPredictor:
    """Degenerate hypothesis: always predicts one label.

    Used when a subspace's training slice carries a single class (or no
    usable signal at all)."""

    kind = "constant"

    def __init__(self, label: int):
        self.label = int(label)

    def fit(self, X, y, n_classes: int):
        return self

    def predict(self, X) -> np.ndarray:
        return np.full(np.asarray(X).shape[0], self.label, np.int64)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantPredictor":
        return cls(d["label"])


_PREDICTOR_KINDS = {
    DecisionTree.kind: DecisionTree,
    RandomForest.kind: RandomForest,
    ConstantPredictor.kind: ConstantPredictor,
}


def predictor_from_dict(d: dict):
    try:
        cls = _PREDICTOR_KINDS[d["kind"]]
    except KeyError as exc:
        raise InvalidParameterError(f"unknown predictor kind: {d.get('kind')!r}") from exc
    return cls.from_dict(d)
