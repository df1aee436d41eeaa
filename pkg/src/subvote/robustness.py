"""Corruption-tolerance math: budget of l corrupt features -> corrupt hypotheses.

Analytic bounds exist for disjoint splits, exhaustive k-subset families and
orbit families; arbitrary families (random subspaces in particular) fall back
to an explicit worst-case search. Fractions are exact rationals so tests can
assert equality; only the closed-form approximation returns a float.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import InvalidParameterError
from .subspaces import SubspaceFamily

DEFAULT_SEARCH_BUDGET = 10**7


class Exactness(str, Enum):
    ANALYTIC = "analytic"
    EXACT_SEARCH = "exact_search"
    GREEDY_LOWER_BOUND = "greedy_lower_bound"


@dataclass(frozen=True)
class CorruptionBound:
    """Worst-case corrupt-hypothesis count c (and fraction r) for a budget l.

    ``GREEDY_LOWER_BOUND`` marks a heuristic that may understate the true
    worst case; such values must never feed a certificate.
    """

    l: int
    c: int
    h: int
    r: Fraction
    exactness: Exactness

    def __post_init__(self):
        if not 0 <= self.c <= self.h:
            raise InvalidParameterError(f"c={self.c} outside [0, h={self.h}]")
        if not 0 <= self.r <= 1:
            raise InvalidParameterError(f"r={self.r} outside [0, 1]")

    @property
    def is_sound(self) -> bool:
        return self.exactness is not Exactness.GREEDY_LOWER_BOUND

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "c": self.c,
            "h": self.h,
            "r": {"num": self.r.numerator, "den": self.r.denominator},
            "exactness": self.exactness.value,
        }


def fixed_split_bound(n: int, h: int, l: int) -> CorruptionBound:
    """Disjoint subsets: each corrupt feature corrupts at most one hypothesis."""
    if h < 1 or h > n:
        raise InvalidParameterError(f"need 1 <= h <= n, got h={h}, n={n}")
    _check_l(l)
    c = min(l, h)
    return CorruptionBound(l=l, c=c, h=h, r=Fraction(c, h), exactness=Exactness.ANALYTIC)


def ksubset_corrupt_fraction(n: int, k: int, l: int) -> Fraction:
    """Exact corrupt fraction for the full size-k family:
    1 - C(n-l, k) / C(n, k)."""
    _check_nkl(n, k, l)
    return 1 - Fraction(math.comb(n - l, k), math.comb(n, k))


def theorem2_lower_bound(n: int, k: int, l: int) -> Fraction:
    """Adversary-guaranteed corrupt fraction for ANY family whose hypotheses
    each use at least k of the n features (pigeonhole argument); coincides
    with :func:`ksubset_corrupt_fraction`."""
    _check_nkl(n, k, l)
    return 1 - Fraction(math.comb(n - l, k), math.comb(n, k))


def ksubset_tolerance_approx(n: int, k: int, r: float) -> float:
    """Closed-form budget estimate l < ln(1/(1-r)) * n/k - 1/2.

    An upper approximation of the invertible exact formula, tight when
    n >> k; use :func:`ksubset_max_tolerated` for the exact inversion.
    """
    if not 0 < r < 1:
        raise InvalidParameterError(f"need 0 < r < 1, got r={r}")
    _check_nk(n, k)
    return math.log(1.0 / (1.0 - r)) * n / k - 0.5


def ksubset_max_tolerated(n: int, k: int, r) -> int:
    """Largest l whose exact corrupt fraction stays <= r (exact inversion)."""
    if not 0 <= r < 1:
        raise InvalidParameterError(f"need 0 <= r < 1, got r={r}")
    _check_nk(n, k)
    l = 0
    while l < n and ksubset_corrupt_fraction(n, k, l + 1) <= r:
        l += 1
    return l


def modulus_bound(n: int, k: int, l: int, h: int | None = None) -> CorruptionBound:
    """Orbit families: r <= k*l/n for any union of orbit groups.

    h is the voting-family size used to convert the fraction into a count
    (defaults to n, the size of one full orbit).
    """
    _check_nkl(n, k, l)
    if h is None:
        h = n
    if h < 1:
        raise InvalidParameterError(f"need h >= 1, got {h}")
    r = min(Fraction(1), Fraction(k * l, n))
    c = min(h, (h * k * l) // n)
    return CorruptionBound(l=l, c=c, h=h, r=r, exactness=Exactness.ANALYTIC)


def coverage_probability(n: int, k: int, j: int) -> Fraction:
    """Probability that a uniform size-k subset contains j fixed features."""
    if j < 0 or j > k:
        raise InvalidParameterError(f"need 0 <= j <= k, got j={j}, k={k}")
    _check_nk(n, k)
    p = Fraction(1)
    for i in range(j):
        p *= Fraction(k - i, n - i)
    return p


def worst_case_corrupt_count(
    family: SubspaceFamily, l: int, budget: int = DEFAULT_SEARCH_BUDGET
) -> CorruptionBound:
    """Maximum number of hypotheses an l-feature adversary can corrupt.

    Exhausts all l-feature choices over the features actually used by the
    family (dummy padding excluded) when that search fits the budget;
    otherwise degrades to a greedy cover, flagged as a lower bound.
    """
    _check_l(l)
    h = family.h
    used = sorted(
        {i for s in family.subsets for i in s.indices} - family.dummy_indices
    )
    # Bitmask per feature: which hypotheses contain it.
    hits: dict[int, int] = {f: 0 for f in used}
    for hyp_idx, s in enumerate(family.subsets):
        for f in s.indices:
            if f in hits:
                hits[f] |= 1 << hyp_idx
    l_eff = min(l, len(used))
    if l_eff == 0:
        return CorruptionBound(
            l=l, c=0, h=h, r=Fraction(0), exactness=Exactness.EXACT_SEARCH
        )
    candidates = math.comb(len(used), l_eff)
    if candidates <= budget:
        best = 0
        masks = [hits[f] for f in used]
        for combo in itertools.combinations(masks, l_eff):
            cover = 0
            for m in combo:
                cover |= m
            count = cover.bit_count()
            if count > best:
                best = count
                if best == h:
                    break
        return CorruptionBound(
            l=l, c=best, h=h, r=Fraction(best, h), exactness=Exactness.EXACT_SEARCH
        )
    # Greedy: repeatedly corrupt the feature hitting the most intact hypotheses.
    cover = 0
    for _ in range(l_eff):
        gain, pick = -1, None
        for f in used:
            g = (cover | hits[f]).bit_count()
            if g > gain:
                gain, pick = g, f
        cover |= hits[pick]
    c = cover.bit_count()
    return CorruptionBound(
        l=l, c=c, h=h, r=Fraction(c, h), exactness=Exactness.GREEDY_LOWER_BOUND
    )


def write_bound_curve_csv(path, bounds, comments=()) -> None:
    """Export a list of CorruptionBound rows as CSV (l, c, r, exactness)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["l", "c", "r", "exactness"])
        for b in bounds:
            writer.writerow([b.l, b.c, float(b.r), b.exactness.value])


def _check_nk(n: int, k: int) -> None:
    if n < 1 or k < 1 or k > n:
        raise InvalidParameterError(f"need 1 <= k <= n, got n={n}, k={k}")


def _check_l(l: int) -> None:
    if l < 0:
        raise InvalidParameterError(f"need l >= 0, got {l}")


def _check_nkl(n: int, k: int, l: int) -> None:
    _check_nk(n, k)
    _check_l(l)
    if l > n:
        raise InvalidParameterError(f"budget l={l} exceeds feature count n={n}")
