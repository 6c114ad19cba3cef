"""Shared builders for the test suite.

Everything here is deterministic: callers pass seeds, builders derive
generators from them, and the same call always yields the same data.
"""

import numpy as np
import pytest

from coreselect.data import Dataset, InnerConfig, SelectionConfig


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def tiny_dataset(n: int = 8, d: int = 3, c: int = 2, seed: int = 0) -> Dataset:
    """Random dense dataset with balanced-ish labels, clean labels attached."""
    g = np.random.default_rng(seed)
    feats = g.standard_normal((n, d))
    labels = np.arange(n) % c
    return Dataset(feats, labels, c, clean_labels=labels.copy())


def separable_dataset(n_per_class: int = 20, d: int = 2, gap: float = 6.0, seed: int = 0) -> Dataset:
    """Two Gaussian clusters far enough apart that logistic always separates."""
    g = np.random.default_rng(seed)
    a = g.standard_normal((n_per_class, d)) * 0.3
    b = g.standard_normal((n_per_class, d)) * 0.3
    a[:, 0] -= gap / 2
    b[:, 0] += gap / 2
    feats = np.vstack([a, b])
    labels = np.array([0] * n_per_class + [1] * n_per_class)
    return Dataset(feats, labels, 2, clean_labels=labels.copy())


def ridge_cfg(**kw) -> InnerConfig:
    base = dict(kind="ridge", ridge_lambda=1e-3)
    base.update(kw)
    return InnerConfig(**base)


def selection_cfg(budget: int, **kw) -> SelectionConfig:
    base = dict(budget=budget, outer_iters=20, outer_step=0.5, outer_batch=8,
                inner=ridge_cfg(), seed=0)
    base.update(kw)
    return SelectionConfig(**base)


@pytest.fixture
def tmp_text(tmp_path):
    """Write text content to a temp file, return the path."""

    def _write(name: str, content: str):
        p = tmp_path / name
        p.write_text(content)
        return p

    return _write
