"""Euclidean projection onto the box-constrained l1 ball {0 <= s <= 1, sum(s) <= K}.

The projection of z splits into two cases. If clipping z to the unit box
already lands inside the budget, that clip is the answer. Otherwise the
budget is active, the solution is s = clip(z - v, 0, 1) for the dual shift v
solving sum(clip(z - v, 0, 1)) = K, and that piecewise-linear equation is
solved by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError

__all__ = ["ProjectionParams", "dual_residual", "project"]


@dataclass(frozen=True)
class ProjectionParams:
    """Bisection controls: residual tolerance and iteration cap."""

    tolerance: float = 1e-10
    max_iters: int = 200
    min_bracket: float = 1e-14

    def validate(self) -> None:
        if self.tolerance <= 0 or self.min_bracket <= 0:
            raise ConfigError("projection tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


DEFAULT_PARAMS = ProjectionParams()


def dual_residual(z: np.ndarray, v: float, budget: int) -> float:
    """sum(clip(z - v, 0, 1)) - budget: the root of this in v pins the projection.

    Monotone non-increasing in v; positive means the shifted point still
    exceeds the budget.
    """
    z = np.asarray(z, dtype=np.float64)
    return float(np.minimum(1.0, np.maximum(0.0, z - v)).sum() - budget)


def project(z, budget: int, params: ProjectionParams = DEFAULT_PARAMS) -> np.ndarray:
    """Project z onto {s : 0 <= s <= 1, sum(s) <= budget}.

    Exact identity on feasible points: if clip(z, 0, 1) meets the budget the
    clip is returned with no bisection, so points already in the set come
    back unchanged bit for bit.

    Raises
    ------
    ValueError
        If z has non-finite entries.
    ConfigError
        If budget < 1 or params are malformed.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError(f"expected a vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("cannot project a vector with non-finite entries")
    if int(budget) < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    params.validate()
    if z.size == 0:
        return z.copy()

    boxed = np.minimum(1.0, np.maximum(0.0, z))
    if boxed.sum() - budget <= 0.0:
        # Budget inactive: v* = 0 and the box clip is the projection.
        return boxed

    lo = float(z.min()) - 1.0  # residual(lo) = n - K > 0 here
    hi = float(z.max())  # residual(hi) = -K < 0
    v = hi
    for _ in range(params.max_iters):
        v = 0.5 * (lo + hi)
        r = dual_residual(z, v, budget)
        if abs(r) <= params.tolerance or (hi - lo) <= params.min_bracket:
            break
        if r > 0.0:
            lo = v
        else:
            hi = v
    return np.minimum(1.0, np.maximum(0.0, z - v))
