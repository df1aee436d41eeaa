"""Feature-subset family generation.

Four ways to build the subsets that back a voting ensemble: disjoint
fixed splits, exhaustive size-k enumeration, uniform random sampling,
and cyclic-shift orbit families driven by modular index arithmetic.
The orbit machinery (shift, period, partition) is exposed directly
because the corruption-tolerance bounds depend on its combinatorics.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError, InvalidParameterError

DEFAULT_ENUMERATION_CAP = 10**6

# Rejection draws before modulus_partition falls back to a lexicographic
# scan for an uncovered generator.
_REJECTION_LIMIT = 200


class GenerationMethod(str, Enum):
    FIXED_SPLIT = "fixed_split"
    K_SUBSET = "k_subset"
    RANDOM_SUBSPACE = "random_subspace"
    MODULUS = "modulus"


@dataclass(frozen=True)
class Subspace:
    """A set of distinct feature indices, stored sorted."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(idx) == 0:
            raise InvalidParameterError("subspace must contain at least one feature")
        if len(set(idx)) != len(idx):
            raise InvalidParameterError(f"duplicate feature indices: {self.indices}")
        if idx[0] < 0:
            raise InvalidParameterError(f"negative feature index: {idx[0]}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    def mask(self, n: int) -> int:
        """Bitmask encoding of the subspace over n features (bit i == feature i)."""
        if self.indices[-1] >= n:
            raise InvalidParameterError(
                f"index {self.indices[-1]} out of range for n={n}"
            )
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    def bits(self, n: int) -> tuple[int, ...]:
        """0/1 list form of the subspace (the binary mask as a tuple)."""
        m = self.mask(n)
        return tuple((m >> i) & 1 for i in range(n))


def subspace_from_mask(mask: int, n: int) -> Subspace:
    return Subspace(tuple(i for i in range(n) if (mask >> i) & 1))


def circular_shift_bits(bits: Sequence[int], j: int) -> tuple[int, ...]:
    """Circular right shift of a 0/1 list by j positions."""
    n = len(bits)
    j %= n
    return tuple(bits[(i - j) % n] for i in range(n))


@dataclass
class SubspaceFamily:
    """An ordered collection of subspaces plus how it was generated.

    ``dummy_indices`` are padding features introduced by
    :func:`pad_dummy_features`; they participate in orbit construction but
    are excluded from learning.
    """

    n: int
    subsets: list[Subspace]
    method: GenerationMethod
    params: dict = field(default_factory=dict)
    dummy_indices: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"need n >= 1, got {self.n}")
        if len(self.subsets) < 1:
            raise InvalidParameterError("family must contain at least one subspace")
        for s in self.subsets:
            if s.indices[-1] >= self.n:
                raise InvalidParameterError(
                    f"subspace index {s.indices[-1]} out of range for n={self.n}"
                )
        if any(i < 0 or i >= self.n for i in self.dummy_indices):
            raise InvalidParameterError("dummy index out of range")
        self.dummy_indices = frozenset(int(i) for i in self.dummy_indices)

    @property
    def h(self) -> int:
        return len(self.subsets)

    def sizes(self) -> list[int]:
        return [s.k for s in self.subsets]

    def learning_indices(self, i: int) -> tuple[int, ...]:
        """Feature indices of subspace i with dummy features removed."""
        return tuple(j for j in self.subsets[i].indices if j not in self.dummy_indices)


def feature_permutation(n: int, seed: int) -> list[int]:
    """Seeded random ordering of the n feature indices.

    Provided as a standalone utility so any method can randomize or
    otherwise re-map feature order before generation; see
    :func:`remap_family`.
    """
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.permutation(n)]


def remap_family(family: SubspaceFamily, order: Sequence[int]) -> SubspaceFamily:
    """Relabel features of a family through an explicit permutation.

    ``order[i]`` is the original feature that generation position ``i``
    refers to, so callers can inject mutual-information or domain-knowledge
    orderings computed elsewhere.
    """
    if sorted(order) != list(range(family.n)):
        raise InvalidParameterError("order must be a permutation of range(n)")
    mapped = [Subspace(tuple(order[i] for i in s.indices)) for s in family.subsets]
    dummies = frozenset(order[i] for i in family.dummy_indices)
    params = dict(family.params)
    params["remapped"] = True
    return SubspaceFamily(family.n, mapped, family.method, params, dummies)


def fixed_split(
    n: int,
    h: int,
    ordering_seed: int = 0,
    order: Sequence[int] | None = None,
    atomic_groups: Sequence[Sequence[int]] | None = None,
) -> SubspaceFamily:
    """Partition n features into h disjoint, nearly equal subsets.

    Feature order is randomized by ``ordering_seed`` (or fixed by an
    explicit ``order``) before chunking; exactly ``n mod h`` subsets get
    ``n//h + 1`` features and the rest get ``n//h``.

    ``atomic_groups`` lists features that must stay together (functionally
    derived features); when given, subsets are built from whole groups and
    the exact size guarantee is relaxed to a greedy balance.
    """
    if h < 1 or h > n:
        raise InvalidParameterError(f"fixed_split needs 1 <= h <= n, got h={h}, n={n}")
    if atomic_groups:
        if order is not None:
            raise InvalidParameterError("atomic_groups and order are mutually exclusive")
        units = _check_groups(n, atomic_groups)
        rng = np.random.default_rng(ordering_seed)
        unit_order = rng.permutation(len(units))
        buckets: list[list[int]] = [[] for _ in range(h)]
        for u in unit_order:
            target = min(range(h), key=lambda b: (len(buckets[b]), b))
            buckets[target].extend(units[u])
        if any(not b for b in buckets):
            raise InvalidParameterError(
                f"cannot fill {h} subsets from {len(units)} atomic units"
            )
        subsets = [Subspace(tuple(b)) for b in buckets]
    else:
        if order is not None:
            if sorted(order) != list(range(n)):
                raise InvalidParameterError("order must be a permutation of range(n)")
            perm = [int(i) for i in order]
        else:
            perm = feature_permutation(n, ordering_seed)
        base, rem = divmod(n, h)
        subsets = []
        pos = 0
        for i in range(h):
            size = base + (1 if i < rem else 0)
            subsets.append(Subspace(tuple(perm[pos : pos + size])))
            pos += size
    return SubspaceFamily(
        n,
        subsets,
        GenerationMethod.FIXED_SPLIT,
        params={"h": h, "ordering_seed": ordering_seed},
    )


def _check_groups(n: int, groups: Sequence[Sequence[int]]) -> list[list[int]]:
    """Expand atomic groups plus leftover singletons into disjoint units."""
    seen: set[int] = set()
    units: list[list[int]] = []
    for g in groups:
        g = [int(i) for i in g]
        if not g:
            continue
        if any(i < 0 or i >= n for i in g):
            raise InvalidParameterError(f"group index out of range: {g}")
        if seen.intersection(g):
            raise InvalidParameterError("atomic groups must be disjoint")
        seen.update(g)
        units.append(sorted(g))
    units.extend([i] for i in range(n) if i not in seen)
    return units


def enumerate_k_subsets(
    n: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> SubspaceFamily:
    """All C(n,k) size-k subsets in lexicographic order."""
    _check_nk(n, k)
    total = math.comb(n, k)
    if total > cap:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} subsets exceeds the enumeration cap of {cap}"
        )
    subsets = [Subspace(c) for c in itertools.combinations(range(n), k)]
    return SubspaceFamily(
        n, subsets, GenerationMethod.K_SUBSET, params={"k": k, "cap": cap}
    )


def random_subspace(
    n: int,
    k: int,
    h: int,
    seed: int,
    atomic_groups: Sequence[Sequence[int]] | None = None,
) -> SubspaceFamily:
    """h distinct size-k subsets drawn uniformly from all C(n,k) of them.

    The same (n, k, h, seed) always reproduces the same family. With
    ``atomic_groups``, whole groups are sampled until at least k features
    are collected, so subset sizes may exceed k.
    """
    _check_nk(n, k)
    rng = np.random.default_rng(seed)
    if atomic_groups:
        units = _check_groups(n, atomic_groups)
        chosen: dict[tuple[int, ...], None] = {}
        attempts = 0
        while len(chosen) < h:
            attempts += 1
            if attempts > 1000 * h:
                raise InvalidParameterError(
                    f"could not sample {h} distinct group-respecting subsets"
                )
            picks = rng.permutation(len(units))
            got: list[int] = []
            for u in picks:
                got.extend(units[u])
                if len(got) >= k:
                    break
            chosen.setdefault(tuple(sorted(got)), None)
        subsets = [Subspace(c) for c in chosen]
    else:
        total = math.comb(n, k)
        if h > total:
            raise InvalidParameterError(
                f"cannot draw {h} distinct subsets: only C({n},{k}) = {total} exist"
            )
        if total <= max(4 * h, 10_000):
            # Small space: enumerate once and sample rows without replacement.
            all_subsets = list(itertools.combinations(range(n), k))
            picked = rng.choice(total, size=h, replace=False)
            subsets = [Subspace(all_subsets[int(i)]) for i in picked]
        else:
            # Rejection sampling stays uniform over the not-yet-chosen subsets.
            chosen = {}
            while len(chosen) < h:
                c = tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))
                chosen.setdefault(c, None)
            subsets = [Subspace(c) for c in chosen]
    return SubspaceFamily(
        n,
        subsets,
        GenerationMethod.RANDOM_SUBSPACE,
        params={"k": k, "h": h, "seed": seed},
    )


def shift(b: Subspace, n: int) -> Subspace:
    """Add one to every index, modulo n."""
    if b.indices[-1] >= n:
        raise InvalidParameterError(f"index {b.indices[-1]} out of range for n={n}")
    return Subspace(tuple((i + 1) % n for i in b.indices))


def _rotate_mask(mask: int, j: int, n: int) -> int:
    # Circular right shift: feature i moves to (i + j) mod n.
    j %= n
    full = (1 << n) - 1
    return ((mask << j) | (mask >> (n - j))) & full if j else mask


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def period(b: Subspace, n: int) -> int:
    """Minimal positive circular shift that maps the subset onto itself.

    The fixing shifts form a subgroup of Z_n, so only divisors of n need
    checking; the result always divides n.
    """
    mask = b.mask(n)
    for j in _divisors(n):
        if _rotate_mask(mask, j, n) == mask:
            return j
    raise AssertionError("unreachable: shift by n always fixes the mask")


def modulus_group(b: Subspace, n: int) -> list[Subspace]:
    """Orbit of a subset under repeated index shifting; length equals period."""
    p = period(b, n)
    orbit = [b]
    cur = b
    for _ in range(p - 1):
        cur = shift(cur, n)
        orbit.append(cur)
    return orbit


def _euler_phi(n: int) -> int:
    result = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def count_modulus_groups(n: int, k: int) -> int:
    """Number of distinct shift orbits among all size-k subsets.

    Burnside count of binary necklaces of length n with k ones:
    (1/n) * sum over d | gcd(n,k) of phi(d) * C(n/d, k/d).
    """
    _check_nk(n, k)
    g = math.gcd(n, k)
    total = sum(_euler_phi(d) * math.comb(n // d, k // d) for d in _divisors(g))
    assert total % n == 0
    return total // n


def modulus_partition(
    n: int,
    k: int,
    num_groups: int | None = None,
    seed: int | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SubspaceFamily:
    """Union of distinct shift orbits drawn from the orbit partition of all
    size-k subsets.

    ``num_groups=None`` materializes the full partition (subject to the
    enumeration cap). Otherwise generator subsets are drawn seed-uniformly
    from subsets not covered by earlier orbits; after repeated collisions
    the draw falls back to a deterministic lexicographic scan.
    """
    _check_nk(n, k)
    total_groups = count_modulus_groups(n, k)
    if num_groups is None:
        if math.comb(n, k) > cap:
            raise BudgetExceededError(
                f"full partition has C({n},{k}) = {math.comb(n, k)} subsets, "
                f"exceeding the cap of {cap}"
            )
        num_groups = total_groups
    if num_groups < 1:
        raise InvalidParameterError("num_groups must be >= 1")
    if num_groups > total_groups:
        raise InvalidParameterError(
            f"only {total_groups} orbit groups exist for n={n}, k={k}; "
            f"requested {num_groups}"
        )
    rng = np.random.default_rng(seed)
    covered: set[int] = set()
    subsets: list[Subspace] = []
    for _ in range(num_groups):
        gen = _draw_uncovered(n, k, covered, rng)
        for member in modulus_group(gen, n):
            covered.add(member.mask(n))
            subsets.append(member)
    return SubspaceFamily(
        n,
        subsets,
        GenerationMethod.MODULUS,
        params={"k": k, "num_groups": num_groups, "seed": seed},
    )


def _draw_uncovered(
    n: int, k: int, covered: set[int], rng: np.random.Generator
) -> Subspace:
    for _ in range(_REJECTION_LIMIT):
        cand = Subspace(tuple(int(i) for i in rng.choice(n, size=k, replace=False)))
        if cand.mask(n) not in covered:
            return cand
    # Covered region is dense; scan lexicographically for a free generator.
    for c in itertools.combinations(range(n), k):
        cand = Subspace(c)
        if cand.mask(n) not in covered:
            return cand
    raise AssertionError("unreachable: caller checked the group count")


def padded_modulus_partition(
    n: int,
    k: int,
    num_groups: int | None = None,
    seed: int | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SubspaceFamily:
    """Modulus partition after dummy-feature padding to a multiple of k.

    Padding makes an orbit of size ceil(n/k) constructible; the padded
    indices are recorded in ``dummy_indices`` and skipped at learning time.
    """
    n_padded, dummies = pad_dummy_features(n, k)
    fam = modulus_partition(n_padded, k, num_groups=num_groups, seed=seed, cap=cap)
    fam.dummy_indices = dummies
    fam.params["n_unpadded"] = n
    return fam


def group_size_spectrum(n: int, k: int) -> set[int]:
    """Possible orbit sizes: n/q for each divisor q of gcd(n, k).

    Every realized orbit size lies in this set and, for k < n, each member
    is realized by a block-repeating generator. k = n is degenerate: the
    only subset is shift-invariant, so the single realized size is 1.
    """
    _check_nk(n, k)
    if k == n:
        return {1}
    g = math.gcd(n, k)
    return {n // q for q in _divisors(g)}


def repeating_pattern_subspace(n: int, k: int, q: int) -> Subspace:
    """Generator whose orbit has size exactly n/q (q must divide gcd(n,k)).

    Sets the first k/q positions of each of the q blocks of length n/q,
    the explicit construction behind the spectrum realization.
    """
    _check_nk(n, k)
    if q < 1 or math.gcd(n, k) % q != 0:
        raise InvalidParameterError(f"q={q} must divide gcd({n},{k})")
    if k == n and q != n:
        raise InvalidParameterError("k = n admits only the trivial orbit (q = n)")
    block = n // q
    ones = k // q
    return Subspace(tuple(b * block + j for b in range(q) for j in range(ones)))


def pad_dummy_features(n: int, k: int) -> tuple[int, frozenset[int]]:
    """Pad n up to the next multiple of k; returns (n', dummy index set)."""
    _check_nk(n, k)
    rem = n % k
    if rem == 0:
        return n, frozenset()
    n_padded = n + k - rem
    return n_padded, frozenset(range(n, n_padded))


def _check_nk(n: int, k: int) -> None:
    if n < 1 or k < 1 or k > n:
        raise InvalidParameterError(f"need 1 <= k <= n, got n={n}, k={k}")


# -- serialization -----------------------------------------------------------


def family_to_dict(family: SubspaceFamily) -> dict:
    return {
        "n": family.n,
        "method": family.method.value,
        "params": family.params,
        "dummy_indices": sorted(family.dummy_indices),
        "subsets": [list(s.indices) for s in family.subsets],
    }


def family_from_dict(d: dict) -> SubspaceFamily:
    try:
        return SubspaceFamily(
            n=int(d["n"]),
            subsets=[Subspace(tuple(s)) for s in d["subsets"]],
            method=GenerationMethod(d["method"]),
            params=dict(d.get("params", {})),
            dummy_indices=frozenset(d.get("dummy_indices", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"malformed family record: {exc}") from exc


def save_family(family: SubspaceFamily, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(family_to_dict(family), fh, indent=1)
        fh.write("\n")


def load_family(path) -> SubspaceFamily:
    with open(path, "r", encoding="utf-8") as fh:
        return family_from_dict(json.load(fh))
