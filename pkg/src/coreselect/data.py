"""Shared domain model: datasets, masks, probability vectors, run configuration.

Example index is identity everywhere: masks, probability entries, coreset
indices and trace records all refer to positions in one Dataset, and no
operation reorders a dataset it was handed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Iterator, Sequence

import numpy as np

from .exceptions import ConfigError, DataError

__all__ = [
    "LabeledExample",
    "Dataset",
    "Mask",
    "ProbabilityVector",
    "InnerConfig",
    "SelectionConfig",
    "IterationRecord",
    "SelectionTrace",
    "ValidationReport",
    "dataset_validate",
    "derived_rng",
]


def derived_rng(seed: int, *key) -> np.random.Generator:
    """Generator for a named sub-stream of `seed`.

    Sub-streams with different keys are statistically independent, and the
    mapping (seed, key) -> stream is stable across runs and platforms.
    String key parts are allowed for readability; they are hashed to ints.
    """
    parts = []
    for k in key:
        if isinstance(k, str):
            k = int.from_bytes(k.encode("utf-8"), "little") % (2**63)
        parts.append(int(k))
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(parts))
    return np.random.default_rng(ss)


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LabeledExample:
    """One example: a feature vector, a label, and optionally the label it
    had before any synthetic corruption."""

    features: np.ndarray
    label: int
    clean_label: int | None = None


class Dataset:
    """Ordered, immutable collection of labeled examples with dense features.

    Parameters
    ----------
    features : array, shape (n, d)
    labels : int array, shape (n,)
    num_classes : int
        Size of the label alphabet. Labels are *not* range-checked here so
        that `dataset_validate` can report violations; use it as the gate.
    clean_labels : optional int array, shape (n,)
        Pre-corruption labels, carried so noise discovery can be scored.
    """

    def __init__(self, features, labels, num_classes: int, clean_labels=None):
        features = np.array(features, dtype=np.float64, order="C")
        labels = np.array(labels, dtype=np.int64, order="C")
        if features.ndim != 2:
            raise DataError(f"features must be 2-d, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataError(
                f"labels shape {labels.shape} does not match {features.shape[0]} examples"
            )
        if num_classes < 1:
            raise DataError("num_classes must be positive")
        if clean_labels is not None:
            clean_labels = np.array(clean_labels, dtype=np.int64, order="C")
            if clean_labels.shape != labels.shape:
                raise DataError("clean_labels shape does not match labels")
            clean_labels = _lock(clean_labels)
        self.features = _lock(features)
        self.labels = _lock(labels)
        self.num_classes = int(num_classes)
        self.clean_labels = clean_labels

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample], num_classes: int) -> "Dataset":
        report = dataset_validate(examples, num_classes)
        if not report.ok:
            raise DataError("; ".join(report.violations))
        feats = np.stack([np.asarray(e.features, dtype=np.float64).ravel() for e in examples])
        labels = np.array([e.label for e in examples], dtype=np.int64)
        clean = None
        if any(e.clean_label is not None for e in examples):
            clean = np.array(
                [e.label if e.clean_label is None else e.clean_label for e in examples],
                dtype=np.int64,
            )
        return cls(feats, labels, num_classes, clean)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def has_clean_labels(self) -> bool:
        return self.clean_labels is not None

    def example(self, i: int) -> LabeledExample:
        clean = None if self.clean_labels is None else int(self.clean_labels[i])
        return LabeledExample(self.features[i], int(self.labels[i]), clean)

    def __iter__(self) -> Iterator[LabeledExample]:
        return (self.example(i) for i in range(len(self)))

    def subset(self, indices) -> "Dataset":
        """New dataset holding the given positions, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        clean = None if self.clean_labels is None else self.clean_labels[idx]
        return Dataset(self.features[idx], self.labels[idx], self.num_classes, clean)

    @staticmethod
    def concat(parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise DataError("cannot concatenate zero datasets")
        num_classes = max(p.num_classes for p in parts)
        dims = {p.feature_dim for p in parts}
        if len(dims) != 1:
            raise DataError(f"feature dims differ across parts: {sorted(dims)}")
        feats = np.concatenate([p.features for p in parts])
        labels = np.concatenate([p.labels for p in parts])
        clean = None
        if any(p.has_clean_labels for p in parts):
            clean = np.concatenate(
                [p.clean_labels if p.has_clean_labels else p.labels for p in parts]
            )
        return Dataset(feats, labels, num_classes, clean)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def replace_labels(self, labels: np.ndarray, keep_clean: bool = True) -> "Dataset":
        """Same features and ordering, new labels. Preserves (or seeds) the
        clean-label record so corruption stays discoverable."""
        clean = self.clean_labels if (keep_clean and self.has_clean_labels) else self.labels
        return Dataset(self.features, labels, self.num_classes, clean)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()


def dataset_validate(data, num_classes: int | None = None) -> ValidationReport:
    """Report-style validation: collects violations instead of raising.

    Accepts either a built Dataset or a raw sequence of LabeledExample plus
    `num_classes`. An ok report means Dataset construction succeeds and all
    labels lie in [0, num_classes).
    """
    violations: list[str] = []
    if isinstance(data, Dataset):
        if len(data) == 0:
            violations.append("empty dataset")
        labels = data.labels
        c = data.num_classes
        bad = np.flatnonzero((labels < 0) | (labels >= c))
        for i in bad[:16]:
            violations.append(f"label out of range at index {int(i)}: {int(labels[i])} not in [0, {c})")
        if len(bad) > 16:
            violations.append(f"label out of range at {len(bad) - 16} further indices")
        return ValidationReport(not violations, tuple(violations))

    examples = list(data)
    if num_classes is None:
        raise ConfigError("num_classes is required when validating raw examples")
    if num_classes < 1:
        violations.append(f"num_classes must be positive, got {num_classes}")
    if not examples:
        violations.append("empty dataset")
    dims = set()
    for i, ex in enumerate(examples):
        f = np.asarray(ex.features, dtype=np.float64)
        dims.add(f.ravel().shape[0] if f.ndim <= 1 else f.shape)
        if num_classes >= 1 and not (0 <= int(ex.label) < num_classes):
            violations.append(f"label out of range at index {i}: {int(ex.label)} not in [0, {num_classes})")
    if len(dims) > 1:
        violations.append(f"ragged features: dims {sorted(map(str, dims))}")
    return ValidationReport(not violations, tuple(violations))


class Mask:
    """Fixed-length 0/1 inclusion vector over a dataset's positions."""

    __slots__ = ("bits", "cardinality")

    def __init__(self, bits):
        bits = np.array(bits, dtype=np.uint8, order="C")
        if bits.ndim != 1:
            raise DataError(f"mask must be 1-d, got shape {bits.shape}")
        if bits.size and bits.max() > 1:
            raise DataError("mask entries must be 0 or 1")
        self.bits = _lock(bits)
        self.cardinality = int(bits.sum())

    @classmethod
    def from_indices(cls, n: int, indices) -> "Mask":
        bits = np.zeros(n, dtype=np.uint8)
        bits[np.asarray(indices, dtype=np.int64)] = 1
        return cls(bits)

    @classmethod
    def zeros(cls, n: int) -> "Mask":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "Mask":
        return cls(np.ones(n, dtype=np.uint8))

    def support(self) -> np.ndarray:
        """Included positions, ascending."""
        return np.flatnonzero(self.bits).astype(np.int64)

    def __len__(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, Mask) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return f"Mask(n={len(self)}, k={self.cardinality})"


class ProbabilityVector:
    """Per-example inclusion probabilities together with the budget K.

    Entries live in [0, 1]. Feasibility with respect to the capped simplex
    (sum <= K) is the projection operator's job, not a construction-time
    constraint: freshly updated score vectors pass through here on their way
    to the projection.
    """

    __slots__ = ("values", "budget")

    def __init__(self, values, budget: int):
        values = np.array(values, dtype=np.float64, order="C")
        if values.ndim != 1:
            raise ConfigError(f"probability vector must be 1-d, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigError("probability vector has non-finite entries")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ConfigError("probability entries must lie in [0, 1]")
        if int(budget) < 1:
            raise ConfigError(f"budget must be >= 1, got {budget}")
        self.values = _lock(values)
        self.budget = int(budget)

    def __len__(self) -> int:
        return self.values.shape[0]

    def replace(self, values) -> "ProbabilityVector":
        return ProbabilityVector(values, self.budget)

    def __repr__(self) -> str:
        return f"ProbabilityVector(n={len(self)}, K={self.budget}, sum={self.values.sum():.4f})"


@dataclass(frozen=True)
class InnerConfig:
    """Inner-loop learner configuration.

    kind is one of "logistic", "mlp", "ridge". batch_size 0 means full-batch
    gradients. Training stops early once the epoch-end loss has improved by
    less than plateau_tol for plateau_patience consecutive epochs.
    """

    kind: str = "logistic"
    epochs: int = 100
    step_size: float = 0.1
    momentum: float = 0.9
    batch_size: int = 0
    hidden: int = 100
    init_scale: float = 1.0
    warm_start: bool = False
    plateau_tol: float = 1e-6
    plateau_patience: int = 5
    ridge_lambda: float = 1e-3

    def validate(self) -> None:
        if self.kind not in ("logistic", "mlp", "ridge"):
            raise ConfigError(f"unknown learner kind: {self.kind!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.step_size <= 0:
            raise ConfigError("step_size must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigError("momentum must lie in [0, 1)")
        if self.batch_size < 0:
            raise ConfigError("batch_size must be >= 0 (0 = full batch)")
        if self.hidden < 1:
            raise ConfigError("hidden width must be >= 1")
        if self.ridge_lambda < 0:
            raise ConfigError("ridge_lambda must be >= 0")


@dataclass(frozen=True)
class SelectionConfig:
    """Outer-loop (selection) configuration.

    The defaults keep every optional mechanism off: constant step size, no
    adaptive moments, no control variate. extract_mode chooses how a coreset
    is read out of the final probabilities ("top_k" or "sample").
    """

    budget: int
    outer_iters: int = 500
    outer_step: float = 2.5
    outer_batch: int = 32
    inner: InnerConfig = field(default_factory=InnerConfig)
    seed: int = 0
    extract_mode: str = "top_k"
    adaptive_step: bool = False
    cosine_schedule: bool = False
    control_variate: bool = False

    def validate(self, n_items: int | None = None) -> None:
        if self.budget < 1:
            raise ConfigError(f"budget must be >= 1, got {self.budget}")
        if n_items is not None and self.budget > n_items:
            raise ConfigError(f"budget {self.budget} exceeds {n_items} items")
        if self.outer_iters < 1:
            raise ConfigError("outer_iters must be >= 1")
        if self.outer_step <= 0:
            raise ConfigError("outer_step must be positive")
        if self.outer_batch < 1:
            raise ConfigError("outer_batch must be >= 1")
        if self.extract_mode not in ("top_k", "sample"):
            raise ConfigError(f"unknown extract_mode: {self.extract_mode!r}")
        self.inner.validate()


@dataclass
class IterationRecord:
    """One outer iteration's diagnostics. Field names match the trace file."""

    iter: int
    outer_loss: float
    grad_norm: float
    grad_map_norm: float
    polarization: float
    expected_card: float
    noise_ratio: float | None = None
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class SelectionTrace:
    """Per-iteration records plus a running empirical gradient variance.

    The variance is the mean over components of Var[g_i] across the recorded
    iterations (estimator spread, not a curvature estimate).
    """

    def __init__(self):
        self.records: list[IterationRecord] = []
        self._g_count = 0
        self._g_sum: np.ndarray | None = None
        self._g_sqnorm_sum = 0.0

    def append(self, record: IterationRecord, gradient: np.ndarray | None = None) -> None:
        self.records.append(record)
        if gradient is not None:
            g = np.asarray(gradient, dtype=np.float64)
            if self._g_sum is None:
                self._g_sum = np.zeros_like(g)
            self._g_count += 1
            self._g_sum += g
            self._g_sqnorm_sum += float(g @ g)

    @property
    def grad_variance(self) -> float:
        if self._g_count < 2 or self._g_sum is None:
            return 0.0
        n = self._g_count
        mean_sq = self._g_sqnorm_sum / n
        sq_mean = float(self._g_sum @ self._g_sum) / n**2
        return max(0.0, (mean_sq - sq_mean) * n / (n - 1)) / self._g_sum.size

    def __len__(self) -> int:
        return len(self.records)

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec.to_dict()) + "\n")

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return tuple(f.name for f in fields(IterationRecord))
