"""Squared-extrapolation acceleration of the outer fixed-point map.

One accelerated iteration evaluates the plain map twice, extrapolates along
the squared secant with step length alpha = -||r|| / ||v||, renormalizes the
columns, and guards monotonicity: whenever the extrapolated objective rises,
alpha is damped toward -1 (alpha <- (alpha - 1) / 2) and after the backtrack
budget the step falls back to the two plain evaluations.  At alpha = -1 the
step is exactly those two plain evaluations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .frame import Frame, normalize_columns
from .solver import SolverConfig, _DESCENT_SLACK, _outer, frame_objective

log = logging.getLogger("telet.accel")

_FIXED_POINT_NORM = 1e-14


@dataclass
class SquaremState:
    """Intermediate quantities of one accelerated step (mostly for tests)."""

    base: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    r: np.ndarray
    v: np.ndarray
    alpha: float
    backtrack_count: int


def _squarem_step(
    x: np.ndarray, config: SolverConfig, force_alpha: float | None = None
) -> tuple[np.ndarray, dict]:
    """One accelerated step on the raw matrix, with step info for tracing."""
    _, f_base = frame_objective(x)
    x1, info1 = _outer(x, config)
    x2, info2 = _outer(x1, config)
    mu1, _ = frame_objective(x1)
    mu2, f2 = frame_objective(x2)
    visited = [(mu1, x1), (mu2, x2)]
    inner = info1["inner_iters"] + info2["inner_iters"]
    dead = info1["degenerate"] + info2["degenerate"]
    r = x1 - x
    v = x2 - x1 - r
    norm_v = float(np.linalg.norm(v))
    if force_alpha is None and norm_v < _FIXED_POINT_NORM:
        return x2, {
            "inner_iters": inner, "degenerate": dead,
            "stalled": info1["stalled"] and info2["stalled"],
            "alpha": -1.0, "backtracks": 0, "visited": visited,
        }
    alpha = force_alpha if force_alpha is not None else -float(np.linalg.norm(r)) / norm_v
    backtracks = 0
    while True:
        if alpha == -1.0:
            candidate, f_cand = x2, f2
        else:
            candidate = normalize_columns(x - 2.0 * alpha * r + alpha * alpha * v, fallback=x2)
            _, f_cand = frame_objective(candidate)
        if f_cand <= f_base + _DESCENT_SLACK:
            break
        if backtracks >= config.max_backtracks:
            log.debug("backtrack budget spent; falling back to the plain double step")
            candidate, alpha = x2, -1.0
            break
        alpha = (alpha - 1.0) / 2.0
        backtracks += 1
    mu_cand, _ = frame_objective(candidate)
    visited.append((mu_cand, candidate))
    return candidate, {
        "inner_iters": inner, "degenerate": dead, "stalled": info1["stalled"] and info2["stalled"],
        "alpha": float(alpha), "backtracks": backtracks, "visited": visited,
    }


def squarem_step(frame: Frame, config: SolverConfig | None = None) -> Frame:
    """One safeguarded extrapolated iteration on a frame."""
    config = config or SolverConfig()
    x_new, _ = _squarem_step(frame.data, config)
    return Frame(frame.field, x_new)
