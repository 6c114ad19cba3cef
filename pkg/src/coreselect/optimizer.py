"""Projected policy-gradient outer loop over inclusion probabilities.

Each outer iteration draws one mask from the current probabilities, trains
the inner learner on it, scores that model on (a mini-batch of) the outer
examples, and takes a projected step along
(loss - baseline) * grad log p(mask | s), the score-function estimate of
the population objective's gradient. Iteration t derives its own rng stream
from (seed, t), so runs are reproducible and iterations are independent of
how many masks earlier iterations drew.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bernoulli import DEFAULT_CLAMP, ScoreClamp, sample_mask, score_gradient
from .data import (
    Dataset,
    IterationRecord,
    ProbabilityVector,
    SelectionConfig,
    SelectionTrace,
    derived_rng,
)
from .exceptions import ConfigError, DataError, RunAbortedError
from .learners import evaluate_loss, fit
from .projection import DEFAULT_PARAMS, ProjectionParams, project
from .scenarios import noise_ratio

__all__ = [
    "OuterState",
    "init_probabilities",
    "pge_step",
    "run_selection",
    "run_selection_loop",
    "extract_coreset",
    "gradient_mapping_norm",
    "polarization",
]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
RESAMPLE_LIMIT = 16  # mask redraws within one iteration before it is skipped
MAX_CONSECUTIVE_SKIPS = 50
TRACE_POLARIZATION_EPS = 0.05


@dataclass
class OuterState:
    """Mutable outer-loop state: probabilities, counters, moments, baseline."""

    s: ProbabilityVector
    iteration: int = 0
    moment1: np.ndarray | None = None
    moment2: np.ndarray | None = None
    baseline: float = 0.0
    baseline_count: int = 0
    trace: SelectionTrace = field(default_factory=SelectionTrace)


def init_probabilities(n_items: int, budget: int) -> ProbabilityVector:
    """Uniform start s_i = K/n, already feasible."""
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if budget > n_items:
        raise ConfigError(f"budget {budget} exceeds {n_items} items")
    return ProbabilityVector(np.full(n_items, budget / n_items), budget)


def polarization(s: ProbabilityVector, epsilon: float = TRACE_POLARIZATION_EPS) -> float:
    """Fraction of entries within epsilon of 0 or 1."""
    if not (0.0 < epsilon < 0.5):
        raise ConfigError(f"polarization epsilon must lie in (0, 0.5), got {epsilon}")
    v = s.values
    return float(((v <= epsilon) | (v >= 1.0 - epsilon)).mean())


def gradient_mapping_norm(
    s: ProbabilityVector,
    grad: np.ndarray,
    eta: float,
    params: ProjectionParams = DEFAULT_PARAMS,
) -> float:
    """Norm of (s - P(s - eta * grad)) / eta, the projected stationarity measure.

    Zero iff s is a fixed point of the projected step; equals |grad| when the
    step stays strictly inside the feasible set.
    """
    if eta <= 0.0:
        raise ConfigError(f"eta must be positive, got {eta}")
    moved = project(s.values - eta * np.asarray(grad, dtype=np.float64), s.budget, params)
    return float(np.linalg.norm((s.values - moved) / eta))


def pge_step(
    state: OuterState,
    mask,
    batch_loss: float,
    eta_t: float,
    *,
    adaptive_step: bool = False,
    control_variate: bool = False,
    clamp: ScoreClamp = DEFAULT_CLAMP,
    proj_params: ProjectionParams = DEFAULT_PARAMS,
    diag_eta: float | None = None,
) -> OuterState:
    """One projected policy-gradient update. Mutates and returns `state`.

    The score-function estimate (batch_loss - baseline) * grad log p(mask|s)
    is formed at the pre-update probabilities; the baseline is the running
    mean of losses from *previous* steps (independent of this mask), used
    only when control_variate is set. With adaptive_step the raw estimate
    feeds adam-style moments and the normalized direction is stepped along;
    the recorded gradient diagnostics always describe the raw estimate.
    """
    if eta_t <= 0.0:
        raise ConfigError(f"eta_t must be positive, got {eta_t}")
    batch_loss = float(batch_loss)
    score = score_gradient(state.s, mask, clamp)
    baseline = state.baseline if (control_variate and state.baseline_count > 0) else 0.0
    ghat = (batch_loss - baseline) * score
    if not math.isfinite(batch_loss) or not np.all(np.isfinite(ghat)):
        raise RunAbortedError(
            f"non-finite gradient at update {state.iteration + 1}: batch_loss={batch_loss}"
        )
    grad_norm = float(np.linalg.norm(ghat))
    gmap = gradient_mapping_norm(state.s, ghat, diag_eta if diag_eta else eta_t, proj_params)

    if adaptive_step:
        if state.moment1 is None:
            state.moment1 = np.zeros(len(state.s))
            state.moment2 = np.zeros(len(state.s))
        t = state.iteration + 1
        state.moment1 = ADAM_BETA1 * state.moment1 + (1.0 - ADAM_BETA1) * ghat
        state.moment2 = ADAM_BETA2 * state.moment2 + (1.0 - ADAM_BETA2) * ghat * ghat
        mhat = state.moment1 / (1.0 - ADAM_BETA1**t)
        vhat = state.moment2 / (1.0 - ADAM_BETA2**t)
        direction = mhat / (np.sqrt(vhat) + ADAM_EPS)
    else:
        direction = ghat

    new_values = project(state.s.values - eta_t * direction, state.s.budget, proj_params)
    state.s = state.s.replace(new_values)
    state.iteration += 1
    state.baseline_count += 1
    state.baseline += (batch_loss - state.baseline) / state.baseline_count

    record = IterationRecord(
        iter=state.iteration,
        outer_loss=batch_loss,
        grad_norm=grad_norm,
        grad_map_norm=gmap,
        polarization=polarization(state.s),
        expected_card=float(state.s.values.sum()),
    )
    state.trace.append(record, gradient=ghat)
    return state


def run_selection_loop(n_items: int, cfg: SelectionConfig, loss_fn, noise_hook=None):
    """Generic outer loop over any masked objective.

    loss_fn(mask, rng) -> float evaluates one drawn mask; rng is the
    iteration's derived stream, already advanced past the mask draw.
    Iterations whose mask comes up empty after RESAMPLE_LIMIT redraws are
    skipped without a record; the run aborts after MAX_CONSECUTIVE_SKIPS
    consecutive skips.
    """
    cfg.validate(n_items)
    state = OuterState(init_probabilities(n_items, cfg.budget))
    skips = 0
    for t in range(1, cfg.outer_iters + 1):
        rng_t = derived_rng(cfg.seed, t)
        t_start = time.perf_counter()
        mask = None
        for _ in range(RESAMPLE_LIMIT):
            cand = sample_mask(state.s, rng_t)
            if cand.cardinality > 0:
                mask = cand
                break
        if mask is None:
            skips += 1
            if skips >= MAX_CONSECUTIVE_SKIPS:
                raise RunAbortedError(
                    f"sampling stalled: {skips} consecutive iterations drew only empty masks"
                )
            continue
        skips = 0
        batch_loss = loss_fn(mask, rng_t)
        if cfg.cosine_schedule:
            eta_t = cfg.outer_step * 0.5 * (1.0 + math.cos(math.pi * (t - 1) / cfg.outer_iters))
        else:
            eta_t = cfg.outer_step
        pge_step(
            state,
            mask,
            batch_loss,
            eta_t,
            adaptive_step=cfg.adaptive_step,
            control_variate=cfg.control_variate,
            diag_eta=cfg.outer_step,
        )
        rec = state.trace.records[-1]
        rec.iter = t
        if noise_hook is not None:
            rec.noise_ratio = noise_hook(mask)
        rec.wall_ms = (time.perf_counter() - t_start) * 1e3
    return state.s, state.trace


def run_selection(
    dataset: Dataset,
    outer_examples: Dataset | None,
    cfg: SelectionConfig,
):
    """Full selection run: returns (final probabilities, trace).

    outer_examples scores the inner model each iteration; None means the
    training set itself plays that role. When the training set carries clean
    labels, each record logs the drawn mask's noise ratio.
    """
    outer = dataset if outer_examples is None else outer_examples
    if len(outer) == 0:
        raise DataError("outer example set is empty")
    if cfg.outer_batch > len(outer):
        raise ConfigError(
            f"outer_batch {cfg.outer_batch} exceeds the outer pool of {len(outer)} examples"
        )
    Xo, yo = outer.features, outer.labels
    n_outer = len(outer)

    prev_model = None

    def loss_fn(mask, rng):
        nonlocal prev_model
        model = fit(
            dataset,
            mask,
            cfg.inner,
            rng,
            budget=cfg.budget,
            init=prev_model if cfg.inner.warm_start else None,
        )
        prev_model = model
        if cfg.outer_batch < n_outer:
            bidx = rng.choice(n_outer, size=cfg.outer_batch, replace=False)
            return evaluate_loss(model, Xo[bidx], yo[bidx])
        return evaluate_loss(model, Xo, yo)

    noise_hook = None
    if dataset.has_clean_labels:
        noise_hook = lambda mask: noise_ratio(dataset, mask)

    return run_selection_loop(len(dataset), cfg, loss_fn, noise_hook)


def extract_coreset(
    s: ProbabilityVector, mode: str = "top_k", rng: np.random.Generator | None = None
) -> np.ndarray:
    """Read a coreset out of final probabilities.

    "top_k" returns the budget-many highest-probability indices (ties go to
    the lowest index), always exactly K of them. "sample" draws one mask from
    p(m | s) and returns its support, whose size varies around sum(s).
    Indices come back ascending either way.
    """
    if mode == "top_k":
        order = np.argsort(-s.values, kind="stable")[: s.budget]
        return np.sort(order).astype(np.int64)
    if mode == "sample":
        if rng is None:
            raise ConfigError("sample extraction needs an rng")
        return sample_mask(s, rng).support()
    raise ConfigError(f"unknown extraction mode: {mode!r}")
