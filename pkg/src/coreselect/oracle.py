"""Brute-force references used by the test suite.

Everything here trades speed for directness: full enumeration over masks,
exhaustive grid search for the projection, central finite differences. None
of it shares code with the production paths it checks.
"""

from __future__ import annotations

import math

import numpy as np

from .bernoulli import DEFAULT_CLAMP, ScoreClamp
from .data import Dataset, Mask, ProbabilityVector, SelectionConfig, derived_rng
from .exceptions import ConfigError
from .learners import empty_model, evaluate_loss, fit

__all__ = [
    "enumerate_masks",
    "enumerate_phi",
    "mc_policy_gradient",
    "grid_project",
    "finite_difference_gradient",
    "fd_param_gradients",
]

MAX_ENUM_ITEMS = 16


def enumerate_masks(n: int) -> np.ndarray:
    """All 2^n masks as a (2^n, n) 0/1 matrix; row index is the mask id with
    bit i of the id standing for item i."""
    if not (0 <= n <= MAX_ENUM_ITEMS):
        raise ValueError(f"enumeration supports up to {MAX_ENUM_ITEMS} items, got {n}")
    ids = np.arange(2**n, dtype=np.int64)
    return ((ids[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


def _mask_loss(dataset, cfg: SelectionConfig, Xo, yo, bits, mask_id, cache):
    if mask_id in cache:
        return cache[mask_id]
    rng = derived_rng(cfg.seed, "mask", mask_id)
    if bits.sum() == 0:
        model = empty_model(dataset, cfg.inner, rng)
    else:
        model = fit(dataset, Mask(bits), cfg.inner, rng, budget=cfg.budget)
    loss = evaluate_loss(model, Xo, yo)
    cache[mask_id] = loss
    return loss


def enumerate_phi(
    dataset: Dataset,
    s: ProbabilityVector,
    cfg: SelectionConfig,
    outer_examples: Dataset | None = None,
    loss_cache: dict | None = None,
):
    """Exact objective and gradient by summing over every mask.

    Phi(s) = sum_m p(m|s) L(m); the gradient uses the exact partial products
    d p / d s_i = (+-1) * prod_{j != i} factor_j, which stays finite at
    degenerate entries where the score form would divide by zero. Masks of
    probability zero contribute nothing to Phi. Each mask's inner fit is
    seeded by (cfg.seed, mask id), so repeated calls reuse identical models;
    pass a shared loss_cache dict to skip refits across calls.
    """
    n = len(dataset)
    if n > MAX_ENUM_ITEMS:
        raise ValueError(f"enumeration supports up to {MAX_ENUM_ITEMS} items, got {n}")
    if len(s) != n:
        raise ConfigError(f"probability vector length {len(s)} != dataset size {n}")
    outer = dataset if outer_examples is None else outer_examples
    Xo, yo = outer.features, outer.labels
    cache = {} if loss_cache is None else loss_cache

    masks = enumerate_masks(n)
    on = masks.astype(bool)
    v = s.values
    F = np.where(on, v[None, :], 1.0 - v[None, :])  # per-coordinate factors
    pref = np.cumprod(F, axis=1)
    suff = np.cumprod(F[:, ::-1], axis=1)[:, ::-1]
    p = pref[:, -1]
    p_excl = np.ones_like(F)
    p_excl[:, 1:] *= pref[:, :-1]
    p_excl[:, :-1] *= suff[:, 1:]
    sign = np.where(on, 1.0, -1.0)

    needed = (p > 0.0) | (p_excl != 0.0).any(axis=1)
    losses = np.zeros(masks.shape[0])
    for mid in np.flatnonzero(needed):
        losses[mid] = _mask_loss(dataset, cfg, Xo, yo, masks[mid], int(mid), cache)

    phi = float(p @ losses)
    grad = (sign * p_excl * losses[:, None]).sum(axis=0)
    return phi, grad


def mc_policy_gradient(
    dataset: Dataset,
    s: ProbabilityVector,
    cfg: SelectionConfig,
    outer_examples: Dataset | None,
    n_draws: int,
    rng: np.random.Generator,
    control_variate: bool = False,
    clamp: ScoreClamp = DEFAULT_CLAMP,
    loss_cache: dict | None = None,
):
    """Monte-Carlo score-function estimate of grad Phi over n_draws masks.

    Returns (component means, component standard errors). Distinct masks are
    fitted once and memoized with the same per-mask seeds as enumerate_phi,
    so the two oracles price any mask identically. The optional control
    variate subtracts the running mean of strictly earlier losses, which
    leaves the estimator unbiased.
    """
    n = len(dataset)
    if n > MAX_ENUM_ITEMS:
        raise ValueError(f"enumeration supports up to {MAX_ENUM_ITEMS} items, got {n}")
    if n_draws < 2:
        raise ConfigError("need at least 2 draws for a standard error")
    outer = dataset if outer_examples is None else outer_examples
    Xo, yo = outer.features, outer.labels
    cache = {} if loss_cache is None else loss_cache

    v = s.values
    bits = rng.random((n_draws, n)) < v[None, :]
    ids = bits @ (1 << np.arange(n, dtype=np.int64))
    losses_by_id = {
        int(mid): _mask_loss(dataset, cfg, Xo, yo, bits[first].astype(np.uint8), int(mid), cache)
        for mid, first in zip(*np.unique(ids, return_index=True))
    }
    L = np.array([losses_by_id[int(mid)] for mid in ids])

    vhat = clamp.apply(v)
    score = bits / vhat[None, :] - (~bits) / (1.0 - vhat[None, :])
    if control_variate:
        prior_mean = np.concatenate([[0.0], np.cumsum(L)[:-1]]) / np.maximum(
            1, np.arange(n_draws)
        )
        weights = L - prior_mean
    else:
        weights = L
    est = weights[:, None] * score
    mean = est.mean(axis=0)
    se = est.std(axis=0, ddof=1) / math.sqrt(n_draws)
    return mean, se


def _nearest_down(x: float) -> int:
    """Nearest integer with half-ties toward the smaller value."""
    lo = math.floor(x)
    return int(lo) if (x - lo) <= 0.5 else int(lo) + 1


def grid_project(z, budget: int, resolution: float = 1e-3) -> np.ndarray:
    """Exhaustive grid reference for the projection, n <= 3.

    Searches every grid point of {0 <= s <= 1, sum s <= budget} with the
    given spacing, pruned only by the exchange argument that an optimal
    coordinate never exceeds its nearest grid value (lowering it by one step
    would strictly improve otherwise). Ties resolve to the lexicographically
    smallest grid vector. The last coordinate is closed-form given the rest:
    its nearest value, budget-clipped.
    """
    z = np.asarray(z, dtype=np.float64)
    n = z.size
    if not (1 <= n <= 3):
        raise ValueError(f"grid_project supports 1 <= n <= 3, got {n}")
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if not (0.0 < resolution <= 1.0):
        raise ConfigError(f"resolution must lie in (0, 1], got {resolution}")
    res = float(resolution)
    G = int(math.floor(1.0 / res + 1e-9))  # grid values per axis: 0..G
    Kg = min(n * G, int(math.floor(budget / res + 1e-9)))

    def axis_cap(zi: float) -> int:
        # optimum satisfies g*res - zi <= res/2
        return max(0, min(G, Kg, int(math.floor(zi / res + 0.5 + 1e-12))))

    last_nearest = max(0, min(G, _nearest_down(z[-1] / res)))

    if n == 1:
        g = min(last_nearest, Kg)
        return np.array([g * res])

    u1 = np.arange(axis_cap(z[0]) + 1, dtype=np.int64)
    d1 = (u1 * res - z[0]) ** 2
    if n == 2:
        rem = Kg - u1
        g_last = np.minimum(last_nearest, rem)
        obj = d1 + (g_last * res - z[1]) ** 2
        best = int(np.argmin(obj))
        return np.array([u1[best] * res, g_last[best] * res])

    u2 = np.arange(axis_cap(z[1]) + 1, dtype=np.int64)
    d2 = (u2 * res - z[1]) ** 2
    rem = Kg - u1[:, None] - u2[None, :]
    feasible = rem >= 0
    g_last = np.minimum(last_nearest, np.maximum(rem, 0))
    obj = d1[:, None] + d2[None, :] + (g_last * res - z[2]) ** 2
    obj[~feasible] = np.inf
    flat = int(np.argmin(obj))  # row-major: lexicographic over (g1, g2)
    i, j = divmod(flat, u2.size)
    return np.array([u1[i] * res, u2[j] * res, g_last[i, j] * res])


def finite_difference_gradient(f, x, h: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function of a vector."""
    x = np.asarray(x, dtype=np.float64)
    if h <= 0:
        raise ConfigError("h must be positive")
    grad = np.zeros_like(x)
    for i in range(x.size):
        bumped = x.copy()
        bumped[i] = x[i] + h
        hi = f(bumped)
        bumped[i] = x[i] - h
        lo = f(bumped)
        grad[i] = (hi - lo) / (2.0 * h)
    return grad


def fd_param_gradients(loss_fn, arrays, h: float = 1e-5):
    """Central differences across a list of parameter arrays.

    loss_fn() -> float must read the arrays' *current* contents; entries are
    perturbed in place and restored. Returns one gradient array per input.
    """
    if h <= 0:
        raise ConfigError("h must be positive")
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            hi = loss_fn()
            flat[i] = orig - h
            lo = loss_fn()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * h)
        grads.append(g)
    return grads
