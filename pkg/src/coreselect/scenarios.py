"""Synthetic corruption scenarios and dataset generators.

All transforms are pure: they return new Dataset objects with the same
example ordering, recording pre-corruption labels as clean_labels so that
discovery metrics stay computable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Mask
from .exceptions import ConfigError, DataError

__all__ = [
    "NoiseSpec",
    "ImbalanceSpec",
    "apply_symmetric_noise",
    "apply_pairwise_noise",
    "make_imbalanced",
    "imbalance_factor",
    "noise_ratio",
    "gen_blobs",
    "gen_feature_bed",
    "add_feature_noise",
]


@dataclass(frozen=True)
class NoiseSpec:
    """Label corruption request: kind is "symmetric" or "pairwise"."""

    kind: str
    rate: float

    def __post_init__(self):
        if self.kind not in ("symmetric", "pairwise"):
            raise ConfigError(f"unknown noise kind: {self.kind!r}")
        if not (0.0 <= self.rate <= 1.0):
            raise ConfigError(f"noise rate must lie in [0, 1], got {self.rate}")

    @classmethod
    def parse(cls, text: str) -> "NoiseSpec":
        """Parse "kind:rate", e.g. "symmetric:0.4"."""
        kind, sep, rate = text.partition(":")
        if not sep:
            raise ConfigError(f"noise spec must look like kind:rate, got {text!r}")
        try:
            return cls(kind.strip(), float(rate))
        except ValueError as exc:
            raise ConfigError(f"bad noise rate in {text!r}") from exc

    def apply(self, dataset: Dataset, rng: np.random.Generator) -> Dataset:
        if self.kind == "symmetric":
            return apply_symmetric_noise(dataset, self.rate, rng)
        return apply_pairwise_noise(dataset, self.rate, rng)


@dataclass(frozen=True)
class ImbalanceSpec:
    """Exponential class decimation with ratio sigma per class rank."""

    sigma: float

    def __post_init__(self):
        if not (0.0 < self.sigma <= 1.0):
            raise ConfigError(f"imbalance sigma must lie in (0, 1], got {self.sigma}")

    def apply(self, dataset: Dataset, rng: np.random.Generator) -> Dataset:
        return make_imbalanced(dataset, self.sigma, rng)


def apply_symmetric_noise(dataset: Dataset, rate: float, rng: np.random.Generator) -> Dataset:
    """Flip each label with probability `rate` to a uniformly random *other*
    class. Ordering unchanged; original labels kept as clean_labels."""
    if not (0.0 <= rate <= 1.0):
        raise ConfigError(f"noise rate must lie in [0, 1], got {rate}")
    C = dataset.num_classes
    if rate > 0.0 and C < 2:
        raise ConfigError("symmetric noise needs at least 2 classes")
    labels = dataset.labels.copy()
    flip = rng.random(len(dataset)) < rate
    k = int(flip.sum())
    if k:
        draws = rng.integers(0, C - 1, size=k)
        # shift draws past the true label so the new label is never the old one
        labels[flip] = draws + (draws >= labels[flip])
    return dataset.replace_labels(labels, keep_clean=False)


def apply_pairwise_noise(dataset: Dataset, rate: float, rng: np.random.Generator) -> Dataset:
    """Flip each label with probability `rate` to the next class modulo C."""
    if not (0.0 <= rate <= 1.0):
        raise ConfigError(f"noise rate must lie in [0, 1], got {rate}")
    C = dataset.num_classes
    if rate > 0.0 and C < 2:
        raise ConfigError("pairwise noise needs at least 2 classes")
    labels = dataset.labels.copy()
    flip = rng.random(len(dataset)) < rate
    labels[flip] = (labels[flip] + 1) % C
    return dataset.replace_labels(labels, keep_clean=False)


def make_imbalanced(dataset: Dataset, sigma: float, rng: np.random.Generator) -> Dataset:
    """Keep floor(n_c * sigma^rank) examples of each class, rank following
    ascending class index. Survivors keep their relative order.

    Raises
    ------
    ConfigError
        If sigma is outside (0, 1] or any class would end up empty.
    """
    if not (0.0 < sigma <= 1.0):
        raise ConfigError(f"imbalance sigma must lie in (0, 1], got {sigma}")
    counts = dataset.class_counts()
    kept: list[np.ndarray] = []
    for rank, c in enumerate(range(dataset.num_classes)):
        idx_c = np.flatnonzero(dataset.labels == c)
        keep = int(np.floor(counts[c] * sigma**rank))
        if keep < 1:
            raise ConfigError(
                f"class {c} would end up empty (had {counts[c]}, sigma^{rank} too small)"
            )
        kept.append(rng.choice(idx_c, size=keep, replace=False))
    survivors = np.sort(np.concatenate(kept))
    return dataset.subset(survivors)


def imbalance_factor(dataset: Dataset) -> float:
    """Largest class count divided by smallest. Errors if any class is empty."""
    counts = dataset.class_counts()
    if counts.min() < 1:
        empty = np.flatnonzero(counts == 0)
        raise DataError(f"imbalance factor undefined: class {int(empty[0])} is empty")
    return float(counts.max() / counts.min())


def noise_ratio(dataset: Dataset, mask) -> float:
    """Fraction of selected examples whose label differs from its clean label.

    `mask` may be a Mask or an index array. Requires clean labels.
    """
    if not dataset.has_clean_labels:
        raise DataError("noise ratio needs clean labels")
    idx = mask.support() if isinstance(mask, Mask) else np.asarray(mask, dtype=np.int64)
    if idx.size == 0:
        raise DataError("noise ratio undefined for an empty selection")
    return float((dataset.labels[idx] != dataset.clean_labels[idx]).mean())


def gen_blobs(
    n_per_class: int,
    num_classes: int,
    feature_dim: int,
    separation: float,
    rng: np.random.Generator,
) -> Dataset:
    """Isotropic unit-variance Gaussian blobs, one per class, pairwise mean
    distance `separation`. Requires feature_dim >= num_classes (means sit on
    scaled coordinate axes)."""
    if n_per_class < 1 or num_classes < 1:
        raise ConfigError("n_per_class and num_classes must be >= 1")
    if feature_dim < num_classes:
        raise ConfigError(
            f"feature_dim {feature_dim} < num_classes {num_classes}: means need one axis each"
        )
    if separation < 0.0:
        raise ConfigError("separation must be >= 0")
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), n_per_class)
    means = np.zeros((num_classes, feature_dim))
    means[np.arange(num_classes), np.arange(num_classes)] = separation / np.sqrt(2.0)
    X = means[labels] + rng.standard_normal((labels.size, feature_dim))
    return Dataset(X, labels, num_classes, clean_labels=labels.copy())


def gen_feature_bed(
    n: int,
    informative: int,
    noise_dims: int,
    rng: np.random.Generator,
    margin: float = 1.0,
) -> tuple[Dataset, np.ndarray]:
    """Binary task whose labels depend only on the first `informative`
    coordinates, via a linear rule with the given margin; the remaining
    coordinates are independent noise.

    Returns (dataset, informative indices).
    """
    if n < 1 or informative < 1 or noise_dims < 0:
        raise ConfigError("need n >= 1, informative >= 1, noise_dims >= 0")
    if margin <= 0.0:
        raise ConfigError("margin must be positive")
    # weights bounded away from zero: every informative coordinate must
    # actually carry signal, otherwise the recorded index set lies
    w = rng.choice([-1.0, 1.0], size=informative) * rng.uniform(0.5, 1.5, size=informative)
    X = rng.standard_normal((n, informative + noise_dims))
    score = X[:, :informative] @ w
    signed = np.where(score >= 0.0, 1.0, -1.0)
    # push each point along w so |<x, w>| >= margin with the sign preserved
    X[:, :informative] += (margin / (w @ w)) * signed[:, None] * w[None, :]
    labels = (signed > 0).astype(np.int64)
    ds = Dataset(X, labels, 2, clean_labels=labels.copy())
    return ds, np.arange(informative, dtype=np.int64)


def add_feature_noise(dataset: Dataset, std: float, rng: np.random.Generator) -> Dataset:
    """Additive iid Gaussian noise on every feature. Labels untouched."""
    if std < 0.0:
        raise ConfigError("noise std must be >= 0")
    X = dataset.features + rng.standard_normal(dataset.features.shape) * std
    return Dataset(X, dataset.labels, dataset.num_classes, dataset.clean_labels)
