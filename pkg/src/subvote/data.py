"""Dataset ingestion, splitting, baselines, and synthetic redundant data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._binom import clopper_pearson
from .adversary import FeatureStats
from .errors import DataError, InvalidParameterError

SPLIT_CAP = 100_000


@dataclass
class Dataset:
    """Numeric feature matrix with integer-coded labels.

    ``label_names`` maps code -> original label value (first-seen order at
    ingestion); ``stats`` is present only after splitting and reflects the
    training portion exclusively.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] | None = None
    label_names: list = field(default_factory=list)
    stats: FeatureStats | None = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise DataError("X must be (m, n) and y (m,) with matching m")
        if np.isnan(self.X).any():
            raise DataError("missing values are not accepted after ingestion")
        if not self.label_names:
            self.label_names = list(range(int(self.y.max()) + 1 if self.m else 0))
        if len(self.label_names) < 2:
            raise DataError("need at least 2 label values")
        if self.m and (self.y.min() < 0 or self.y.max() >= len(self.label_names)):
            raise DataError("labels must be coded 0..d-1")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def d(self) -> int:
        return len(self.label_names)

    def subset(self, rows) -> "Dataset":
        return Dataset(
            X=self.X[rows],
            y=self.y[rows],
            feature_names=self.feature_names,
            label_names=list(self.label_names),
            stats=self.stats,
        )


def load_csv(path, label_column, delimiter: str = ",", has_header: bool = True) -> Dataset:
    """Parse a CSV of numeric features plus one label column.

    The label column is named (header) or an integer position; label values
    are coded 0..d-1 in first-seen order. Unparseable or missing cells fail
    with the offending row and column named.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        rows = [row for row in reader if row]
    if not rows:
        raise DataError(f"{path} is empty")
    if has_header:
        header, rows = rows[0], rows[1:]
    else:
        header = [str(i) for i in range(len(rows[0]))]
    if isinstance(label_column, str):
        try:
            label_idx = header.index(label_column)
        except ValueError as exc:
            raise DataError(
                f"unknown label column {label_column!r}; columns are {header}"
            ) from exc
    else:
        label_idx = int(label_column)
        if not 0 <= label_idx < len(header):
            raise DataError(f"label column index {label_idx} out of range")
    if not rows:
        raise DataError(f"{path} has a header but no data rows")

    feature_names = [name for i, name in enumerate(header) if i != label_idx]
    codes: dict[str, int] = {}
    X = np.empty((len(rows), len(header) - 1))
    y = np.empty(len(rows), np.int64)
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"row {r + 1}: expected {len(header)} cells, got {len(row)}")
        col_out = 0
        for c, cell in enumerate(row):
            if c == label_idx:
                y[r] = codes.setdefault(cell.strip(), len(codes))
                continue
            try:
                X[r, col_out] = float(cell)
            except ValueError as exc:
                raise DataError(
                    f"row {r + 1}, column {header[c]!r}: cannot parse {cell!r} as a number"
                ) from exc
            col_out += 1
    labels = [None] * len(codes)
    for value, code in codes.items():
        labels[code] = value
    return Dataset(X=X, y=y, feature_names=feature_names, label_names=labels)


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset back out in the ingestion schema (features + label)."""
    names = dataset.feature_names or [f"f{i}" for i in range(dataset.n)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [label_column])
        for i in range(dataset.m):
            writer.writerow(
                [repr(v) for v in dataset.X[i]] + [dataset.label_names[dataset.y[i]]]
            )


def permute_split(
    dataset: Dataset, train_fraction: float = 0.8, cap: int = SPLIT_CAP, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Global seeded permutation, then split; each side truncated to cap.

    Feature statistics are recomputed on the (possibly truncated) training
    side only, and shared with the returned test set so downstream
    adversaries use training statistics exclusively.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidParameterError(f"need 0 < train_fraction < 1, got {train_fraction}")
    if dataset.m < 2:
        raise InvalidParameterError("need at least 2 instances to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.m)
    n_train = int(round(dataset.m * train_fraction))
    n_train = min(max(n_train, 1), dataset.m - 1)
    train = dataset.subset(perm[:n_train][:cap])
    test = dataset.subset(perm[n_train:][n_train + cap :] if False else perm[n_train:][:cap])
    stats = FeatureStats.from_matrix(train.X)
    train.stats = stats
    test.stats = stats
    return train, test


def majority_label(train: Dataset) -> int:
    counts = np.bincount(train.y, minlength=train.d)
    return int(np.argmax(counts))


def majority_baseline(train: Dataset, test: Dataset) -> float:
    """Error of always predicting the most frequent training label; immune to
    any feature corruption."""
    if train.m == 0 or test.m == 0:
        raise InvalidParameterError("need nonempty train and test sets")
    return float(np.mean(test.y != majority_label(train)))


def synth_redundant(
    signals: int,
    copies: int,
    noise: float,
    m: int,
    d: int = 2,
    seed: int = 0,
    separation: float = 2.0,
) -> Dataset:
    """Synthetic data with heavy relevant-feature redundancy.

    Generative recipe: for each latent signal j, the d classes get distinct
    levels (a seeded random permutation of 0..d-1, centered and scaled by
    ``separation``). An instance of class y has latent value level[y, j] on
    signal j, and each of the ``copies`` feature copies of that signal is
    the latent value plus independent N(0, noise^2) noise. With noise 0,
    any single copy separates the classes perfectly.
    """
    if signals < 1 or copies < 1:
        raise InvalidParameterError("need signals >= 1 and copies >= 1")
    if d < 2:
        raise InvalidParameterError(f"need d >= 2, got {d}")
    if m < 1:
        raise InvalidParameterError(f"need m >= 1, got {m}")
    if noise < 0:
        raise InvalidParameterError(f"need noise >= 0, got {noise}")
    rng = np.random.default_rng(seed)
    offset = (d - 1) / 2.0
    levels = np.stack(
        [(rng.permutation(d) - offset) * separation for _ in range(signals)], axis=1
    )  # (d, signals)
    y = rng.integers(0, d, size=m)
    latent = levels[y]  # (m, signals)
    X = np.repeat(latent, copies, axis=1)
    if noise > 0:
        X = X + rng.normal(0.0, noise, size=X.shape)
    names = [f"s{j}_c{c}" for j in range(signals) for c in range(copies)]
    return Dataset(X=X, y=y, feature_names=names, label_names=list(range(d)))


def binomial_ci(errors: int, m: int, confidence: float) -> tuple[float, float]:
    """Exact two-sided (Clopper-Pearson) interval for an error count."""
    return clopper_pearson(errors, m, confidence)
