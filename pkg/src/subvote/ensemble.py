"""Majority voting over per-subspace hypotheses.

One basic hypothesis is trained per subspace, sees only that subspace's
(non-dummy) columns, and the ensemble predicts the plurality label with
random tie-breaking. Sequential prediction samples hypotheses without
replacement and stops once the leading label's final majority is certain
or probable enough under a without-replacement tail bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidParameterError
from .subspaces import SubspaceFamily, family_from_dict, family_to_dict
from .trees import (
    FEATURE_RULES,
    ConstantPredictor,
    DecisionTree,
    RandomForest,
    predictor_from_dict,
)

MODEL_FORMAT_VERSION = 1

PAPER_TREE_GRID = (10, 20, 50, 100)


class LearnerKind(str, Enum):
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"


@dataclass(frozen=True)
class BaseLearnerConfig:
    """How each subspace hypothesis is trained.

    ``max_features_rule`` is resolved against the subspace's own feature
    count, never the global one.
    """

    kind: LearnerKind = LearnerKind.RANDOM_FOREST
    trees: int = 20
    max_features_rule: str = "sqrt"
    max_depth: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.trees < 1:
            raise InvalidParameterError(f"need trees >= 1, got {self.trees}")
        if self.max_features_rule not in FEATURE_RULES:
            raise InvalidParameterError(
                f"max_features_rule must be one of {FEATURE_RULES}"
            )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "trees": self.trees,
            "max_features_rule": self.max_features_rule,
            "max_depth": self.max_depth,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BaseLearnerConfig":
        return cls(
            kind=LearnerKind(d.get("kind", "random_forest")),
            trees=int(d.get("trees", 20)),
            max_features_rule=d.get("max_features_rule", "sqrt"),
            max_depth=d.get("max_depth"),
            seed=int(d.get("seed", 0)),
        )


def hypothesis_seed(root_seed: int, index: int) -> int:
    """Stable per-hypothesis seed; independent of training order."""
    return int(np.random.SeedSequence([root_seed, index]).generate_state(1)[0])


@dataclass
class VotingEnsemble:
    family: SubspaceFamily
    hypotheses: list
    labels: list[int]
    n: int

    def __post_init__(self):
        if len(self.hypotheses) != len(self.family.subsets):
            raise InvalidParameterError("one hypothesis per subspace required")

    @property
    def h(self) -> int:
        return len(self.hypotheses)

    @property
    def d(self) -> int:
        return len(self.labels)

    def columns(self, i: int) -> tuple[int, ...]:
        return self.family.learning_indices(i)


def train(dataset, family: SubspaceFamily, config: BaseLearnerConfig) -> VotingEnsemble:
    """Fit one hypothesis per subspace on that subspace's columns only.

    Per-hypothesis seeds are derived from (config.seed, subspace index), so
    the result does not depend on the order hypotheses are trained in.
    Single-class training data produces a constant predictor.
    """
    X = np.ascontiguousarray(dataset.X, dtype=np.float64)
    y = np.ascontiguousarray(dataset.y, dtype=np.int64)
    if X.shape[0] == 0:
        raise InvalidParameterError("cannot train on an empty dataset")
    d = dataset.d
    hypotheses = []
    for i in range(family.h):
        cols = family.learning_indices(i)
        if not cols:
            raise InvalidParameterError(
                f"subspace {i} contains only dummy features; nothing to train on"
            )
        if cols[-1] >= X.shape[1]:
            raise InvalidParameterError(
                f"subspace {i} references feature {cols[-1]} but the dataset "
                f"has only {X.shape[1]} columns"
            )
        hypotheses.append(_fit_one(X[:, cols], y, d, config, hypothesis_seed(config.seed, i)))
    # n is the instance width accepted at prediction time; dummy indices sit
    # past the real columns and are never read.
    return VotingEnsemble(
        family=family, hypotheses=hypotheses, labels=list(range(d)), n=X.shape[1]
    )


def _fit_one(X_sub, y, d, config: BaseLearnerConfig, seed: int):
    classes = np.unique(y)
    if classes.size == 1:
        return ConstantPredictor(int(classes[0]))
    if np.all(X_sub == X_sub[0]):
        # No usable signal in these columns; fall back to the majority label.
        return ConstantPredictor(int(np.argmax(np.bincount(y, minlength=d))))
    if config.kind is LearnerKind.DECISION_TREE:
        return DecisionTree(max_depth=config.max_depth, seed=seed).fit(X_sub, y, d)
    return RandomForest(
        n_trees=config.trees,
        max_features=config.max_features_rule,
        max_depth=config.max_depth,
        seed=seed,
    ).fit(X_sub, y, d)


def vote_matrix(ensemble: VotingEnsemble, X) -> np.ndarray:
    """(m, d) label-count matrix; rows sum to h."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != ensemble.n:
        raise InvalidParameterError(
            f"expected {ensemble.n} features, got shape {X.shape}"
        )
    counts = np.zeros((X.shape[0], ensemble.d), np.int64)
    rows = np.arange(X.shape[0])
    for i, hyp in enumerate(ensemble.hypotheses):
        counts[rows, hyp.predict(X[:, ensemble.columns(i)])] += 1
    return counts


def vote_counts(ensemble: VotingEnsemble, x) -> np.ndarray:
    """Label counts for a single instance."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != ensemble.n:
        raise InvalidParameterError(f"expected {ensemble.n} features, got {x.shape}")
    return vote_matrix(ensemble, x[None, :])[0]


def _argmax_with_ties(counts: np.ndarray, rng: np.random.Generator) -> int:
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if tied.size == 1:
        return int(tied[0])
    return int(rng.choice(tied))


def predict_majority(ensemble: VotingEnsemble, x, tie_seed: int = 0) -> int:
    """Plurality label; exact ties resolved uniformly at random via tie_seed."""
    counts = vote_counts(ensemble, x)
    return _argmax_with_ties(counts, np.random.default_rng(tie_seed))


def predict_majority_batch(ensemble: VotingEnsemble, X, tie_seed: int = 0) -> np.ndarray:
    counts = vote_matrix(ensemble, X)
    return labels_from_votes(counts, tie_seed)


def labels_from_votes(counts: np.ndarray, tie_seed: int = 0) -> np.ndarray:
    """Row-wise plurality labels from a vote-count matrix, random on ties."""
    counts = np.asarray(counts)
    rng = np.random.default_rng(tie_seed)
    top = counts.max(axis=1, keepdims=True)
    n_tied = (counts == top).sum(axis=1)
    out = np.argmax(counts, axis=1)
    for i in np.flatnonzero(n_tied > 1):
        out[i] = rng.choice(np.flatnonzero(counts[i] == top[i, 0]))
    return out.astype(np.int64)


def _stop_risk(counts: np.ndarray, lead: int, t: int, h: int) -> float:
    """Union bound on the chance any rival actually holds >= the leader's
    final count, from a sub-Gaussian tail for sampling without replacement
    (the hypergeometric analogue of a Hoeffding bound)."""
    f = (t - 1) / h
    denom = 2.0 * t * (1.0 - f)
    risk = 0.0
    for c, cnt in enumerate(counts):
        if c == lead:
            continue
        gap = counts[lead] - cnt
        if gap <= 0:
            return 1.0
        risk += math.exp(-(gap * gap) / denom)
    return risk


def predict_sequential(
    ensemble: VotingEnsemble,
    x,
    confidence: float,
    seed: int = 0,
    batch: int = 1,
) -> tuple[int, int]:
    """Evaluate hypotheses in random order until the majority label is settled.

    Stops when remaining votes cannot overturn the leader, or when the
    without-replacement tail bound puts the chance of a wrong call at or
    below 1 - confidence. ``confidence=1`` evaluates everything and matches
    :func:`predict_majority` exactly (same tie seed). Returns
    (label, hypotheses_evaluated).
    """
    if not (0.5 < confidence < 1.0 or confidence == 1.0):
        raise InvalidParameterError(
            f"confidence must be in (0.5, 1) or exactly 1, got {confidence}"
        )
    if batch < 1:
        raise InvalidParameterError(f"need batch >= 1, got {batch}")
    if confidence == 1.0:
        return predict_majority(ensemble, x, tie_seed=seed), ensemble.h
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != ensemble.n:
        raise InvalidParameterError(f"expected {ensemble.n} features, got {x.shape}")
    rng = np.random.default_rng(seed)
    h, d = ensemble.h, ensemble.d
    order = rng.permutation(h)
    counts = np.zeros(d, np.int64)
    row = x[None, :]
    evaluated = 0
    alpha = 1.0 - confidence
    while evaluated < h:
        for idx in order[evaluated : evaluated + batch]:
            hyp = ensemble.hypotheses[idx]
            label = int(hyp.predict(row[:, ensemble.columns(int(idx))])[0])
            counts[label] += 1
        evaluated = min(h, evaluated + batch)
        lead = int(np.argmax(counts))
        unseen = h - evaluated
        if unseen == 0:
            break
        gaps = counts[lead] - counts
        gaps[lead] = np.iinfo(np.int64).max
        if gaps.min() > unseen:
            return lead, evaluated
        if d > 1 and _stop_risk(counts, lead, evaluated, h) <= alpha:
            return lead, evaluated
    return _argmax_with_ties(counts, rng), evaluated


# -- persistence ---------------------------------------------------------------


def ensemble_to_dict(ensemble: VotingEnsemble, config: BaseLearnerConfig | None = None) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "family": family_to_dict(ensemble.family),
        "config": config.to_dict() if config is not None else None,
        "labels": list(ensemble.labels),
        "n": ensemble.n,
        "hypotheses": [hyp.to_dict() for hyp in ensemble.hypotheses],
    }


def ensemble_from_dict(d: dict) -> VotingEnsemble:
    version = d.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise InvalidParameterError(
            f"unsupported model format version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    return VotingEnsemble(
        family=family_from_dict(d["family"]),
        hypotheses=[predictor_from_dict(hd) for hd in d["hypotheses"]],
        labels=[int(v) for v in d["labels"]],
        n=int(d["n"]),
    )


def save_ensemble(ensemble: VotingEnsemble, path, config: BaseLearnerConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ensemble_to_dict(ensemble, config), fh)
        fh.write("\n")


def load_ensemble(path) -> VotingEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        return ensemble_from_dict(json.load(fh))
