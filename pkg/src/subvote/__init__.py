"""subvote: majority-vote ensembles over feature subspaces with certified
tolerance to per-instance feature corruption."""

__version__ = "0.1.0"

from ._kernels import USING_NUMBA
from .subspaces import (
    GenerationMethod,
    Subspace,
    SubspaceFamily,
    enumerate_k_subsets,
    fixed_split,
    load_family,
    modulus_group,
    modulus_partition,
    pad_dummy_features,
    period,
    random_subspace,
    save_family,
    shift,
)
from .robustness import (
    CorruptionBound,
    Exactness,
    coverage_probability,
    fixed_split_bound,
    ksubset_corrupt_fraction,
    ksubset_tolerance_approx,
    modulus_bound,
    theorem2_lower_bound,
    worst_case_corrupt_count,
)

__all__ = [
    "USING_NUMBA",
    "GenerationMethod",
    "Subspace",
    "SubspaceFamily",
    "enumerate_k_subsets",
    "fixed_split",
    "load_family",
    "modulus_group",
    "modulus_partition",
    "pad_dummy_features",
    "period",
    "random_subspace",
    "save_family",
    "shift",
    "CorruptionBound",
    "Exactness",
    "coverage_probability",
    "fixed_split_bound",
    "ksubset_corrupt_fraction",
    "ksubset_tolerance_approx",
    "modulus_bound",
    "theorem2_lower_bound",
    "worst_case_corrupt_count",
]
