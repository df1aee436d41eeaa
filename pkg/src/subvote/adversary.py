"""Concrete adversaries under the zero-norm corruption model.

An adversary may rewrite up to l feature values per test instance, choosing
different features each time. Implemented attackers: the model-agnostic weak
adversary (mutual-information-weighted feature choice, values pushed to the
training extreme on the opposite side of the mean) and the analytic
worst-case vote flipper used to validate certificates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParameterError


class AdversaryKind(str, Enum):
    NONE = "none"
    WEAK_MI = "weak_mi"
    WORST_CASE_FLIP = "worst_case_flip"


@dataclass(frozen=True)
class AdversaryConfig:
    l: int
    kind: AdversaryKind = AdversaryKind.WEAK_MI
    seed: int = 0
    mi_bins: int = 10

    def __post_init__(self):
        if self.l < 0:
            raise InvalidParameterError(f"need l >= 0, got {self.l}")
        if self.kind is AdversaryKind.WEAK_MI and self.mi_bins < 2:
            raise InvalidParameterError(f"need mi_bins >= 2, got {self.mi_bins}")

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "kind": self.kind.value,
            "seed": self.seed,
            "mi_bins": self.mi_bins,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdversaryConfig":
        return cls(
            l=int(d["l"]),
            kind=AdversaryKind(d.get("kind", "weak_mi")),
            seed=int(d.get("seed", 0)),
            mi_bins=int(d.get("mi_bins", 10)),
        )


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature min/max/mean, computed on training data only."""

    mins: np.ndarray
    maxs: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        for arr in (self.mins, self.maxs, self.means):
            if arr.shape != self.mins.shape or arr.ndim != 1:
                raise InvalidParameterError("stats arrays must be 1-d and congruent")
        if np.any(self.mins > self.means) or np.any(self.means > self.maxs):
            raise InvalidParameterError("need min <= mean <= max per feature")

    @property
    def n(self) -> int:
        return self.mins.shape[0]

    @classmethod
    def from_matrix(cls, X) -> "FeatureStats":
        X = np.asarray(X, dtype=np.float64)
        return cls(mins=X.min(axis=0), maxs=X.max(axis=0), means=X.mean(axis=0))


def mi_distribution(X, y, bins: int = 10) -> np.ndarray:
    """Feature-sampling weights proportional to mutual information with the
    label, estimated with equal-width discretization.

    Zero-information features are floored at a tiny weight so that sampling
    without replacement stays well defined; constant labels give a uniform
    distribution with a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidParameterError("need at least 2 instances to estimate MI")
    if bins < 2:
        raise InvalidParameterError(f"need bins >= 2, got {bins}")
    m, n = X.shape
    d = int(y.max()) + 1
    label_counts = np.bincount(y, minlength=d).astype(np.float64)
    if np.count_nonzero(label_counts) < 2:
        warnings.warn("labels are constant; MI weights fall back to uniform")
        return np.full(n, 1.0 / n)
    py = label_counts / m
    mi = np.zeros(n)
    for j in range(n):
        col = X[:, j]
        lo, hi = col.min(), col.max()
        if hi <= lo:
            continue
        b = np.minimum(((col - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
        joint = np.zeros((bins, d))
        np.add.at(joint, (b, y), 1.0)
        joint /= m
        pb = joint.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = joint / (pb[:, None] * py[None, :])
            terms = np.where(joint > 0, joint * np.log(ratio), 0.0)
        mi[j] = max(0.0, float(terms.sum()))
    total = mi.sum()
    if total <= 0:
        return np.full(n, 1.0 / n)
    w = mi / total
    w = np.maximum(w, 1e-12)
    return w / w.sum()


def weak_corrupt(x, stats: FeatureStats, dist, l: int, seed: int) -> np.ndarray:
    """Corrupt l distinct features of one instance.

    Features are drawn without replacement with probabilities ``dist``; each
    drawn value is replaced by the training maximum if it sits at or below
    the training mean, otherwise by the training minimum.
    """
    x = np.asarray(x, dtype=np.float64).copy()
    if l < 0 or l > x.shape[0]:
        raise InvalidParameterError(f"need 0 <= l <= n, got l={l}, n={x.shape[0]}")
    if l == 0:
        return x
    rng = np.random.default_rng(seed)
    chosen = rng.choice(x.shape[0], size=l, replace=False, p=np.asarray(dist))
    for f in chosen:
        # Values exactly at the mean count as "below": pushed to the max.
        x[f] = stats.maxs[f] if x[f] <= stats.means[f] else stats.mins[f]
    return x


def worst_case_flip(s, y: int, c: int) -> np.ndarray:
    """Move up to c votes from the true label to the strongest rival.

    The rival is recomputed after every single flip (ties to the lowest
    label index), which drops the margin by exactly 2 per flip while votes
    remain; the resulting margin is always >= original - 2c.
    """
    s = np.asarray(s, dtype=np.int64).copy()
    if c < 0:
        raise InvalidParameterError(f"need c >= 0, got {c}")
    if y < 0 or y >= s.shape[0]:
        raise InvalidParameterError(f"label {y} outside vote vector of size {s.shape[0]}")
    if s.shape[0] < 2:
        return s
    for _ in range(c):
        if s[y] == 0:
            break
        rivals = s.copy()
        rivals[y] = -1
        r = int(np.argmax(rivals))
        s[y] -= 1
        s[r] += 1
    return s


def corrupt_sequence(
    X, config: AdversaryConfig, stats: FeatureStats | None = None, dist=None
) -> np.ndarray:
    """Apply the configured adversary independently to every test instance.

    Fresh feature choices are drawn per instance from seeds derived from
    (config.seed, row); the zero-norm budget is asserted on every output
    row. The vote-space worst-case flipper has no instance-space form and is
    rejected here.
    """
    X = np.asarray(X, dtype=np.float64)
    if config.kind is AdversaryKind.NONE:
        return X.copy()
    if config.kind is AdversaryKind.WORST_CASE_FLIP:
        raise InvalidParameterError(
            "worst_case_flip corrupts vote vectors, not instances; "
            "use adversary.worst_case_flip on the ensemble's votes"
        )
    if stats is None or dist is None:
        raise InvalidParameterError("weak_mi corruption needs training stats and an MI distribution")
    out = np.empty_like(X)
    for i in range(X.shape[0]):
        row_seed = int(np.random.SeedSequence([config.seed, i]).generate_state(1)[0])
        out[i] = weak_corrupt(X[i], stats, dist, config.l, row_seed)
        changed = int(np.count_nonzero(out[i] != X[i]))
        if changed > config.l:
            raise AssertionError(
                f"zero-norm budget violated on row {i}: {changed} > {config.l}"
            )
    return out
