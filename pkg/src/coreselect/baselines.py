"""Classical selection baselines. Each returns sorted, distinct indices."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .exceptions import ConfigError

__all__ = ["uniform_sample", "k_center", "hardest_samples", "herding", "reservoir"]


def _check_budget(budget: int, n: int) -> None:
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if budget > n:
        raise ConfigError(f"budget {budget} exceeds {n} items")


def uniform_sample(n_items: int, budget: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform choice of `budget` distinct positions."""
    _check_budget(budget, n_items)
    return np.sort(rng.choice(n_items, size=budget, replace=False)).astype(np.int64)


def k_center(
    embeddings: np.ndarray,
    budget: int,
    rng: np.random.Generator | None = None,
    first_index: int | None = None,
) -> np.ndarray:
    """Greedy farthest-first traversal in embedding space.

    The first center is drawn uniformly unless first_index pins it; each
    following center is the point farthest from the chosen set (ties to the
    lowest index).
    """
    E = np.asarray(embeddings, dtype=np.float64)
    n = E.shape[0]
    _check_budget(budget, n)
    if first_index is None:
        if rng is None:
            raise ConfigError("k_center needs an rng or an explicit first_index")
        first_index = int(rng.integers(n))
    if not (0 <= first_index < n):
        raise ConfigError(f"first_index {first_index} out of range")
    chosen = [first_index]
    min_d = np.linalg.norm(E - E[first_index], axis=1)
    min_d[first_index] = -1.0  # chosen points never get re-picked
    while len(chosen) < budget:
        nxt = int(np.argmax(min_d))
        chosen.append(nxt)
        d = np.linalg.norm(E - E[nxt], axis=1)
        np.minimum(min_d, d, out=min_d)
        min_d[nxt] = -1.0
    return np.sort(np.array(chosen, dtype=np.int64))


def hardest_samples(dataset: Dataset, model, budget: int) -> np.ndarray:
    """The budget-many examples with the highest model loss (ties to the
    lowest index)."""
    _check_budget(budget, len(dataset))
    losses = model.per_example_loss(dataset.features, dataset.labels)
    order = np.argsort(-losses, kind="stable")[:budget]
    return np.sort(order).astype(np.int64)


def herding(
    embeddings: np.ndarray,
    labels: np.ndarray,
    budget: int,
    num_classes: int,
) -> np.ndarray:
    """Per-class herding toward each class's embedding mean.

    The budget splits as evenly as possible across classes, remainders going
    to the lowest class indices. Within a class, point j is added to greedily
    keep the running selection mean closest to the class mean.
    """
    E = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = E.shape[0]
    _check_budget(budget, n)
    base, rem = divmod(budget, num_classes)
    picked: list[int] = []
    for c in range(num_classes):
        share = base + (1 if c < rem else 0)
        if share == 0:
            continue
        members = np.flatnonzero(labels == c)
        if members.size < share:
            raise ConfigError(
                f"class {c} has {members.size} examples, fewer than its share {share}"
            )
        Ec = E[members]
        mu = Ec.mean(axis=0)
        taken = np.zeros(members.size, dtype=bool)
        running = np.zeros_like(mu)
        for step in range(1, share + 1):
            cand = (running + Ec) / step
            dist = ((cand - mu) ** 2).sum(axis=1)
            dist[taken] = np.inf
            j = int(np.argmin(dist))
            taken[j] = True
            running += Ec[j]
            picked.append(int(members[j]))
    return np.sort(np.array(picked, dtype=np.int64))


def reservoir(stream, budget: int, rng: np.random.Generator) -> np.ndarray:
    """Single-pass uniform reservoir over a stream of unknown length.

    Position t (0-based) replaces a uniform slot with probability
    budget / (t + 1). Returns the sorted positions kept at the end.
    """
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    kept: list[int] = []
    t = -1
    for t, _ in enumerate(stream):
        if t < budget:
            kept.append(t)
            continue
        j = int(rng.integers(0, t + 1))
        if j < budget:
            kept[j] = t
    if t < 0:
        raise ConfigError("reservoir needs a non-empty stream")
    return np.sort(np.array(kept, dtype=np.int64))
