"""Self-checks for the exact reference implementations.

These are the instruments every other test trusts, so each one is validated
here against straight-line code written independently in this file: itertools
grid walks, closed-form gradients, and direct probability sums.
"""

import itertools

import numpy as np
import pytest

from coreselect import ConfigError
from coreselect.data import (
    Dataset,
    InnerConfig,
    Mask,
    ProbabilityVector,
    SelectionConfig,
    derived_rng,
)
from coreselect.bernoulli import ScoreClamp
from coreselect.learners import evaluate_loss, fit
from coreselect.oracle import (
    MAX_ENUM_ITEMS,
    enumerate_masks,
    enumerate_phi,
    fd_param_gradients,
    finite_difference_gradient,
    grid_project,
    mc_policy_gradient,
)


def ridge_selection_cfg(budget, seed=0):
    return SelectionConfig(budget=budget, inner=InnerConfig(kind="ridge"), seed=seed)


def brute_grid(z, budget, res):
    """Exhaustive search over every feasible grid point, smallest distance,
    lexicographic coordinate tuple on ties."""
    steps = int(round(1.0 / res))
    best_d, best_combo = None, None
    for combo in itertools.product(range(steps + 1), repeat=len(z)):
        s = np.array(combo, dtype=float) * res
        if s.sum() > budget + 1e-12:
            continue
        d = float(np.sum((s - z) ** 2))
        if best_d is None or d < best_d - 1e-15 or (abs(d - best_d) <= 1e-15 and combo < best_combo):
            best_d, best_combo = d, combo
    return np.array(best_combo, dtype=float) * res


# ---------------------------------------------------------------- mask enumeration

def test_enumerate_masks_matches_binary_counting():
    out = enumerate_masks(3)
    assert out.shape == (8, 3)
    for mask_id, row in enumerate(out):
        assert mask_id == int(np.sum(row.astype(np.int64) << np.arange(3)))
    assert len({tuple(r) for r in out}) == 8


# ---------------------------------------------------------------- grid search

@pytest.mark.parametrize("n,budget", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_grid_project_equals_exhaustive_search(n, budget):
    g = np.random.default_rng(n * 10 + budget)
    res = 0.05
    for _ in range(12):
        z = g.uniform(-1.5, 2.5, n)
        got = grid_project(z, budget, res)
        ref = brute_grid(z, budget, res)
        if not np.allclose(got, ref, atol=1e-12):
            # only acceptable on an exact-distance tie
            d_got = np.sum((got - z) ** 2)
            d_ref = np.sum((ref - z) ** 2)
            assert abs(d_got - d_ref) <= 1e-12
            assert tuple(got) <= tuple(ref)


def test_grid_project_identity_for_on_grid_feasible_point():
    z = np.array([0.25, 0.5])
    np.testing.assert_allclose(grid_project(z, 1, 0.05), z, atol=1e-12)


def test_grid_project_equal_pair():
    out = grid_project(np.array([0.8, 0.8]), 1, 1e-3)
    np.testing.assert_allclose(out, [0.5, 0.5], atol=1e-3 + 1e-12)


def test_grid_project_symmetric_triple():
    out = grid_project(np.array([2.0, 2.0, 2.0]), 1, 1e-3)
    np.testing.assert_allclose(out, [1 / 3, 1 / 3, 1 / 3], atol=1e-3 + 1e-12)


def test_grid_project_single_coordinate():
    assert grid_project(np.array([0.73]), 1, 0.1) == pytest.approx(0.7)


def test_grid_project_half_step_tie_rounds_down():
    out = grid_project(np.array([0.125, 0.0]), 1, 0.05)
    np.testing.assert_allclose(out, [0.1, 0.0], atol=1e-12)


def test_grid_project_refuses_large_dimension():
    with pytest.raises(ValueError):
        grid_project(np.zeros(4), 1, 0.1)


# ---------------------------------------------------------------- finite differences

def test_fd_gradient_of_squared_norm():
    out = finite_difference_gradient(lambda x: float(np.sum(x**2)), np.array([1.0, 2.0]))
    np.testing.assert_allclose(out, [2.0, 4.0], atol=1e-8)


def test_fd_gradient_of_constant_function():
    out = finite_difference_gradient(lambda x: 3.5, np.array([0.3, -0.7, 1.1]))
    np.testing.assert_allclose(out, 0.0, atol=1e-10)


def test_fd_param_gradients_linear_map():
    a = np.array([1.0, -2.0])
    b = np.array([[0.5]])
    coef_a = np.array([3.0, 4.0])

    def loss():
        return float(coef_a @ a + 7.0 * b[0, 0])

    ga, gb = fd_param_gradients(loss, [a, b])
    np.testing.assert_allclose(ga, coef_a, atol=1e-8)
    np.testing.assert_allclose(gb, [[7.0]], atol=1e-8)
    # arrays restored after probing
    np.testing.assert_array_equal(a, [1.0, -2.0])


# ---------------------------------------------------------------- expected loss

def enumeration_by_hand(dataset, s_vals, cfg):
    """Direct sum over all masks: probabilities by multiplication, losses by
    refitting with the library's per-mask seeding convention."""
    n = len(dataset)
    phi, grad = 0.0, np.zeros(n)
    for bits in itertools.product((0, 1), repeat=n):
        arr = np.array(bits, dtype=np.uint8)
        mask_id = int(np.sum(arr.astype(np.int64) << np.arange(n)))
        p = float(np.prod(np.where(arr, s_vals, 1.0 - s_vals)))
        if p == 0.0:
            continue
        if arr.sum() == 0:
            from coreselect.learners import empty_model

            model = empty_model(dataset, cfg.inner, derived_rng(cfg.seed, "mask", mask_id))
        else:
            model = fit(dataset, Mask(arr), cfg.inner,
                        derived_rng(cfg.seed, "mask", mask_id), budget=cfg.budget)
        loss = evaluate_loss(model, dataset.features, dataset.labels)
        score = arr / s_vals - (1 - arr) / (1.0 - s_vals)
        phi += p * loss
        grad += p * loss * score
    return phi, grad


def test_expected_loss_matches_hand_enumeration():
    g = np.random.default_rng(0)
    ds = Dataset(g.standard_normal((6, 2)), g.integers(0, 2, 6), 2)
    cfg = ridge_selection_cfg(budget=3, seed=5)
    vals = g.uniform(0.15, 0.85, 6)
    s = ProbabilityVector(vals, budget=3)
    phi, grad = enumerate_phi(ds, s, cfg)
    ref_phi, ref_grad = enumeration_by_hand(ds, vals, cfg)
    assert phi == pytest.approx(ref_phi, abs=1e-10)
    np.testing.assert_allclose(grad, ref_grad, atol=1e-9)


def test_expected_loss_point_mass_equals_single_fit():
    g = np.random.default_rng(1)
    ds = Dataset(g.standard_normal((5, 2)), g.integers(0, 2, 5), 2)
    cfg = ridge_selection_cfg(budget=2, seed=3)
    bits = np.array([1, 0, 1, 0, 0], dtype=np.uint8)
    mask_id = int(np.sum(bits.astype(np.int64) << np.arange(5)))
    s = ProbabilityVector(bits.astype(float), budget=2)
    phi, _ = enumerate_phi(ds, s, cfg)
    model = fit(ds, Mask(bits), cfg.inner, derived_rng(3, "mask", mask_id), budget=2)
    assert phi == pytest.approx(evaluate_loss(model, ds.features, ds.labels), abs=1e-12)


def test_expected_loss_gradient_matches_finite_differences():
    # Phi is a polynomial in s, so central differences are extremely sharp
    g = np.random.default_rng(2)
    ds = Dataset(g.standard_normal((5, 2)), g.integers(0, 2, 5), 2)
    cfg = ridge_selection_cfg(budget=2, seed=9)
    vals = g.uniform(0.2, 0.8, 5)
    cache = {}

    def phi_of(x):
        return enumerate_phi(ds, ProbabilityVector(x, 2), cfg, loss_cache=cache)[0]

    _, grad = enumerate_phi(ds, ProbabilityVector(vals, 2), cfg, loss_cache=cache)
    numeric = finite_difference_gradient(phi_of, vals, h=1e-6)
    np.testing.assert_allclose(grad, numeric, atol=1e-6)


def test_expected_loss_gradient_finite_at_degenerate_entries():
    g = np.random.default_rng(4)
    ds = Dataset(g.standard_normal((4, 2)), g.integers(0, 2, 4), 2)
    cfg = ridge_selection_cfg(budget=2, seed=1)
    s = ProbabilityVector(np.array([1.0, 0.0, 0.5, 0.5]), budget=2)
    phi, grad = enumerate_phi(ds, s, cfg)
    assert np.isfinite(phi)
    assert np.all(np.isfinite(grad))


def test_enumeration_refuses_oversized_instances():
    n = MAX_ENUM_ITEMS + 1
    ds = Dataset(np.zeros((n, 2)), np.zeros(n, dtype=np.int64), 2)
    s = ProbabilityVector(np.full(n, 0.5), budget=2)
    with pytest.raises(ValueError):
        enumerate_phi(ds, s, ridge_selection_cfg(2))


# ---------------------------------------------------------------- monte carlo

def test_monte_carlo_estimate_brackets_exact_gradient():
    g = np.random.default_rng(6)
    ds = Dataset(g.standard_normal((6, 2)), g.integers(0, 2, 6), 2)
    cfg = ridge_selection_cfg(budget=3, seed=2)
    vals = g.uniform(0.2, 0.8, 6)
    s = ProbabilityVector(vals, budget=3)
    cache = {}
    _, exact = enumerate_phi(ds, s, cfg, loss_cache=cache)
    mean, se = mc_policy_gradient(ds, s, cfg, None, 30_000, np.random.default_rng(77),
                                  loss_cache=cache)
    assert mean.shape == exact.shape == se.shape
    assert np.all(np.abs(mean - exact) <= 4 * se)


def test_monte_carlo_control_variate_stays_unbiased():
    g = np.random.default_rng(8)
    ds = Dataset(g.standard_normal((5, 2)), g.integers(0, 2, 5), 2)
    cfg = ridge_selection_cfg(budget=2, seed=4)
    vals = g.uniform(0.25, 0.75, 5)
    s = ProbabilityVector(vals, budget=2)
    cache = {}
    _, exact = enumerate_phi(ds, s, cfg, loss_cache=cache)
    mean, se = mc_policy_gradient(ds, s, cfg, None, 30_000, np.random.default_rng(55),
                                  control_variate=True, loss_cache=cache)
    assert np.all(np.abs(mean - exact) <= 4 * se)


def test_monte_carlo_needs_two_draws():
    ds = Dataset(np.zeros((2, 1)), np.array([0, 1]), 2)
    s = ProbabilityVector(np.array([0.5, 0.5]), budget=1)
    with pytest.raises(ConfigError):
        mc_policy_gradient(ds, s, ridge_selection_cfg(1), None, 1, np.random.default_rng(0))


def test_shared_cache_prices_masks_identically():
    g = np.random.default_rng(10)
    ds = Dataset(g.standard_normal((5, 2)), g.integers(0, 2, 5), 2)
    cfg = ridge_selection_cfg(budget=2, seed=6)
    s = ProbabilityVector(g.uniform(0.3, 0.7, 5), budget=2)
    cache = {}
    enumerate_phi(ds, s, cfg, loss_cache=cache)
    frozen = dict(cache)
    mc_policy_gradient(ds, s, cfg, None, 5_000, np.random.default_rng(1), loss_cache=cache)
    for k, v in frozen.items():
        assert cache[k] == v


def test_clamp_with_tiny_epsilon_changes_nothing_for_interior_s():
    g = np.random.default_rng(12)
    ds = Dataset(g.standard_normal((4, 2)), g.integers(0, 2, 4), 2)
    cfg = ridge_selection_cfg(budget=2, seed=8)
    s = ProbabilityVector(g.uniform(0.3, 0.7, 4), budget=2)
    a, _ = mc_policy_gradient(ds, s, cfg, None, 2_000, np.random.default_rng(3),
                              clamp=ScoreClamp(1e-12))
    b, _ = mc_policy_gradient(ds, s, cfg, None, 2_000, np.random.default_rng(3),
                              clamp=ScoreClamp(1e-6))
    np.testing.assert_array_equal(a, b)
