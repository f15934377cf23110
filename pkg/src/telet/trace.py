"""Per-iteration convergence records shared by every iterative construction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATUS_BOUND_REACHED = "bound_reached"
STATUS_MAX_ITERS = "max_iters"
STATUS_STALLED = "stalled"


@dataclass
class TraceRecord:
    iteration: int
    mu: float
    objective: float
    inner_iters: int
    wall_ms: float
    alpha: float | None = None
    backtracks: int | None = None


@dataclass
class ConvergenceTrace:
    """Recorded trajectory with terminal status and best-iterate bookkeeping."""

    records: list[TraceRecord] = field(default_factory=list)
    status: str = STATUS_MAX_ITERS
    bound: float = float("nan")
    best_mu: float = float("inf")
    best_iteration: int = 0
    degenerate_events: int = 0

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    def mus(self) -> np.ndarray:
        return np.array([r.mu for r in self.records])

    def iterations(self) -> np.ndarray:
        return np.array([r.iteration for r in self.records])

    @property
    def has_acceleration_columns(self) -> bool:
        return any(r.alpha is not None for r in self.records)
