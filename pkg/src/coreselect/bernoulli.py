"""Factorized Bernoulli distribution over masks and its score function.

p(m | s) = prod_i s_i^{m_i} (1 - s_i)^{1 - m_i}. Sampling and log-density
use the raw probabilities; only the score (gradient of the log-density) is
evaluated at entries clamped away from {0, 1}, since it divides by them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Mask, ProbabilityVector
from .exceptions import ConfigError, ImpossibleOutcomeError

__all__ = [
    "ScoreClamp",
    "sample_mask",
    "log_prob",
    "score_gradient",
    "expected_cardinality",
]


@dataclass(frozen=True)
class ScoreClamp:
    """Clamp window for score evaluation: entries are pulled into
    [epsilon, 1 - epsilon] before dividing. Sampling never clamps."""

    epsilon: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.epsilon < 0.5):
            raise ConfigError(f"clamp epsilon must lie in (0, 0.5), got {self.epsilon}")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.epsilon, 1.0 - self.epsilon)


DEFAULT_CLAMP = ScoreClamp()


def sample_mask(s: ProbabilityVector, rng: np.random.Generator) -> Mask:
    """Draw m ~ p(m | s): one uniform variate per index, in index order.

    Index i is included iff u_i < s_i, so degenerate entries behave exactly
    (s_i = 0 never includes, s_i = 1 always includes).
    """
    u = rng.random(len(s))
    return Mask((u < s.values).astype(np.uint8))


def log_prob(s: ProbabilityVector, mask: Mask) -> float:
    """log p(mask | s).

    Degenerate entries contribute exactly 0 when the mask agrees with them.

    Raises
    ------
    ImpossibleOutcomeError
        If the mask contradicts a degenerate entry (m_i = 1 with s_i = 0, or
        m_i = 0 with s_i = 1), where the density is zero.
    """
    if len(s) != len(mask):
        raise ConfigError(f"length mismatch: s has {len(s)}, mask has {len(mask)}")
    v = s.values
    on = mask.bits.astype(bool)
    bad_on = np.flatnonzero(on & (v == 0.0))
    bad_off = np.flatnonzero(~on & (v == 1.0))
    if bad_on.size or bad_off.size:
        i = int(bad_on[0]) if bad_on.size else int(bad_off[0])
        raise ImpossibleOutcomeError(
            f"mask bit {int(mask.bits[i])} at index {i} contradicts probability {v[i]}"
        )
    total = 0.0
    if np.any(on):
        total += float(np.log(v[on]).sum())
    if not np.all(on):
        total += float(np.log1p(-v[~on]).sum())
    return total


def score_gradient(
    s: ProbabilityVector, mask: Mask, clamp: ScoreClamp = DEFAULT_CLAMP
) -> np.ndarray:
    """grad_s log p(mask | s), evaluated at clamp.apply(s.values).

    Component i is m_i / s_i - (1 - m_i) / (1 - s_i): positive where the
    mask included the example, negative where it did not.
    """
    if len(s) != len(mask):
        raise ConfigError(f"length mismatch: s has {len(s)}, mask has {len(mask)}")
    v = clamp.apply(s.values)
    m = mask.bits.astype(np.float64)
    return m / v - (1.0 - m) / (1.0 - v)


def expected_cardinality(s: ProbabilityVector) -> float:
    """E[|m|] under p(m | s) = sum_i s_i."""
    return float(s.values.sum())
