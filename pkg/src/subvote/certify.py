"""Data-dependent certification of worst-case error under vote corruption.

The margin histogram of an ensemble on clean test data determines, for any
corrupt-hypothesis budget c, an upper bound on corrupted error: each corrupt
hypothesis can shift an instance's margin down by at most 2, so counting
margins at or below 2c bounds the corrupted empirical loss, and a Hoeffding
slack or an exact binomial tail lifts that to a population statement.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._binom import binom_upper_limit
from .errors import InvalidParameterError, UnsoundCertificateError
from .ensemble import VotingEnsemble, vote_matrix
from .robustness import CorruptionBound


def margin(s, y: int) -> int:
    """Votes for the true label minus the strongest rival's votes."""
    s = np.asarray(s)
    if y < 0 or y >= s.shape[0]:
        raise InvalidParameterError(f"label {y} outside vote vector of size {s.shape[0]}")
    if s.shape[0] == 1:
        return int(s[0])
    rival = np.delete(s, y).max()
    return int(s[y] - rival)


def corrupt_loss(s, y: int, c: int) -> int:
    """Indicator of the margin falling to zero or below after c corruptions."""
    if c < 0:
        raise InvalidParameterError(f"need c >= 0, got {c}")
    return int(margin(s, y) - 2 * c <= 0)


def margins_from_votes(votes: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise margins of a vote-count matrix against true labels."""
    votes = np.asarray(votes, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    m, d = votes.shape
    own = votes[np.arange(m), y]
    if d == 1:
        return own
    masked = votes.copy()
    masked[np.arange(m), y] = np.iinfo(np.int64).min
    return own - masked.max(axis=1)


@dataclass
class MarginHistogram:
    """Margin counts of an h-hypothesis ensemble over m clean test instances."""

    m: int
    h: int
    counts: dict[int, int]

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParameterError("histogram needs at least one instance")
        if sum(self.counts.values()) != self.m:
            raise InvalidParameterError("histogram counts must sum to m")
        if any(abs(delta) > self.h for delta in self.counts):
            raise InvalidParameterError("margins cannot exceed the ensemble size")

    def loss_count(self, c: int) -> int:
        """Instances whose margin survives at most 2c of downward shift."""
        if c < 0:
            raise InvalidParameterError(f"need c >= 0, got {c}")
        return sum(cnt for delta, cnt in self.counts.items() if delta - 2 * c <= 0)

    def empirical_loss(self, c: int) -> float:
        return self.loss_count(c) / self.m


def histogram_from_margins(margins: np.ndarray, h: int) -> MarginHistogram:
    deltas, cnts = np.unique(np.asarray(margins, dtype=np.int64), return_counts=True)
    return MarginHistogram(
        m=int(cnts.sum()), h=h, counts={int(d): int(c) for d, c in zip(deltas, cnts)}
    )


def build_histogram(ensemble: VotingEnsemble, X, y) -> MarginHistogram:
    """Margin histogram of the ensemble over an uncorrupted test set."""
    y = np.asarray(y, dtype=np.int64)
    if y.shape[0] == 0:
        raise InvalidParameterError("empty test set")
    votes = vote_matrix(ensemble, X)
    return histogram_from_margins(margins_from_votes(votes, y), ensemble.h)


def hoeffding_epsilon(m: int, confidence: float) -> float:
    """Slack making the empirical mean exceed the true mean with probability
    at most 1 - confidence: sqrt(ln(1/(1-confidence)) / (2m))."""
    if not 0.0 < confidence < 1.0:
        raise InvalidParameterError(f"need 0 < confidence < 1, got {confidence}")
    if m < 1:
        raise InvalidParameterError(f"need m >= 1, got {m}")
    return math.sqrt(math.log(1.0 / (1.0 - confidence)) / (2.0 * m))


@dataclass(frozen=True)
class CertifiedBound:
    """Error-rate certificate for a corrupt-hypothesis budget c."""

    c: int
    empirical_loss: float
    epsilon: float
    hoeffding_bound: float
    binomial_bound: float
    confidence: float

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "empirical_loss": self.empirical_loss,
            "epsilon": self.epsilon,
            "hoeffding_bound": self.hoeffding_bound,
            "binomial_bound": self.binomial_bound,
            "confidence": self.confidence,
        }


def certified_bound(hist: MarginHistogram, c: int, confidence: float) -> CertifiedBound:
    """Certificate from a clean-test margin histogram at a budget of c
    corrupt hypotheses; both a Hoeffding-slack bound and the exact one-sided
    binomial upper confidence limit are reported."""
    eps = hoeffding_epsilon(hist.m, confidence)
    losses = hist.loss_count(c)
    return CertifiedBound(
        c=c,
        empirical_loss=losses / hist.m,
        epsilon=eps,
        hoeffding_bound=min(1.0, losses / hist.m + eps),
        binomial_bound=binom_upper_limit(losses, hist.m, confidence),
        confidence=confidence,
    )


def bound_curve(
    hist: MarginHistogram,
    family_bound_fn: Callable[[int], CorruptionBound],
    l_max: int,
    confidence: float,
) -> list[tuple[int, CorruptionBound, CertifiedBound]]:
    """Certified bounds for every corruption budget l in 0..l_max.

    ``family_bound_fn`` maps l to the family's corrupt-hypothesis bound;
    heuristic (greedy lower-bound) values are rejected outright because a c
    that may understate the adversary cannot certify anything.
    """
    rows = []
    for l in range(l_max + 1):
        fb = family_bound_fn(l)
        if not fb.is_sound:
            raise UnsoundCertificateError(
                f"corruption bound for l={l} has exactness "
                f"{fb.exactness.value!r}; certificates require an analytic "
                "or exact-search bound"
            )
        rows.append((l, fb, certified_bound(hist, fb.c, confidence)))
    return rows


def write_histogram_csv(path, hist: MarginHistogram, comments=()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["delta", "count"])
        for delta in sorted(hist.counts):
            writer.writerow([delta, hist.counts[delta]])


def write_certified_curve_csv(path, rows, comments=()) -> None:
    """rows: output of :func:`bound_curve`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["l", "c", "empirical", "hoeffding", "binomial"])
        for l, fb, cb in rows:
            writer.writerow(
                [l, fb.c, cb.empirical_loss, cb.hoeffding_bound, cb.binomial_bound]
            )
