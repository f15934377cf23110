"""Minimax coherence solver for unit-norm frames.

The cost being driven down is the largest pairwise energy

    f(X) = max_{i<j} 2 |x_i^H x_j|^2

over frames with unit-norm columns.  Each outer iteration builds, at the
current iterate, a per-pair linear-plus-constant upper bound on that cost

    g_p(x) = 4 Re(x^H d_p) + s_p        (tangent at the iterate),

then solves the resulting saddle problem -- minimize over the frame the
maximum bound, rewritten as a maximization of a concave value function h(q)
over the pair simplex -- with entropic mirror ascent, and finally applies the
closed-form blockwise unit-sphere update.  The matrix D stacking the d_p is
never materialized: its action and adjoint cost O(N^2 d) through the Gram
matrix of the anchor.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .bounds import BoundDomainError, composite_bound, welch_bound
from .frame import Frame, pair_arrays
from .trace import (
    STATUS_BOUND_REACHED,
    STATUS_MAX_ITERS,
    STATUS_STALLED,
    ConvergenceTrace,
    TraceRecord,
)

log = logging.getLogger("telet.solver")

ACCEL_NONE = "none"
ACCEL_SQUAREM = "squarem"

# A fresh step is accepted only if it does not raise the objective beyond
# floating-point noise; the traced guarantee allows 1e-10 per step.
_DESCENT_SLACK = 1e-13
_DEGENERATE_NORM = 1e-14


@dataclass
class SolverConfig:
    """Knobs for the outer loop, the simplex inner solver, and acceleration."""

    max_outer_iters: int = 10_000
    inner_iters: int = 100
    mda_eta: float = 1.0
    stop_tol: float = 1e-5
    rng_seed: int = 0
    acceleration: str = ACCEL_NONE
    trace_every: int = 1
    mda_sign: int = 1
    mda_q_tol: float = 1e-8
    max_backtracks: int = 5
    stall_patience: int = 300

    def __post_init__(self) -> None:
        if self.max_outer_iters < 1 or self.inner_iters < 1 or self.trace_every < 1:
            raise ValueError("iteration counts must be positive")
        if self.mda_eta <= 0 or self.stop_tol <= 0 or self.mda_q_tol <= 0:
            raise ValueError("mda_eta, stop_tol and mda_q_tol must be positive")
        if self.acceleration not in (ACCEL_NONE, ACCEL_SQUAREM):
            raise ValueError(f"unknown acceleration mode: {self.acceleration!r}")
        if self.mda_sign not in (1, -1):
            raise ValueError("mda_sign must be +1 or -1")
        if self.max_backtracks < 0 or self.stall_patience < 1:
            raise ValueError("max_backtracks must be >= 0 and stall_patience >= 1")


@dataclass
class SurrogateData:
    """Per-pair scalars of the linear upper bound anchored at one iterate.

    ``c`` holds the pairwise inner products x_i^H x_j in flat pair order,
    ``s`` the constant terms -6|c|^2 + 4N|c| + 4N^2 d.  The anchor matrix and
    its Gram are kept so products with the implicit direction matrix D can be
    evaluated blockwise.
    """

    c: np.ndarray
    abs_c: np.ndarray
    s: np.ndarray
    anchor: np.ndarray
    gram: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray

    @property
    def d(self) -> int:
        return self.anchor.shape[0]

    @property
    def n(self) -> int:
        return self.anchor.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.c.shape[0]


@dataclass
class SimplexWeights:
    """Nonnegative weights over the unordered pairs, summing to one."""

    q: np.ndarray

    def validate(self, tol: float = 1e-12) -> None:
        if np.any(self.q < -tol):
            raise ValueError("simplex weights must be nonnegative")
        if abs(float(self.q.sum()) - 1.0) > tol:
            raise ValueError("simplex weights must sum to one")


def frame_objective(matrix: np.ndarray) -> tuple[float, float]:
    """(mu, objective) of a unit-column matrix: mu and 2 mu^2."""
    g = np.abs(matrix.conj().T @ matrix)
    np.fill_diagonal(g, 0.0)
    mu = float(g.max())
    return mu, 2.0 * mu * mu


def build_surrogate(frame: Frame | np.ndarray) -> SurrogateData:
    """Per-pair upper-bound data at the given iterate.  Cost O(N^2 d)."""
    x = frame.data if isinstance(frame, Frame) else np.asarray(frame)
    d, n = x.shape
    gram = x.conj().T @ x
    rows, cols = pair_arrays(n)
    c = gram[rows, cols]
    abs_c = np.abs(c)
    s = -6.0 * abs_c**2 + 4.0 * n * abs_c + 4.0 * n * n * d
    return SurrogateData(
        c=c, abs_c=abs_c, s=s, anchor=x.copy(), gram=gram, pair_i=rows, pair_j=cols
    )


def _direction_matrix(surr: SurrogateData, q: np.ndarray) -> np.ndarray:
    """d x N matrix view of D q.

    Column l accumulates sum_m q_{(m,l)} (x_m^H x_l) x_m minus the common
    rank-one term (q . |c| + N d) x_l; both pieces fall out of one Hadamard
    product with the anchor Gram followed by a single matmul.
    """
    n = surr.n
    weights = np.zeros((n, n))
    weights[surr.pair_i, surr.pair_j] = q
    weights[surr.pair_j, surr.pair_i] = q
    lam = float(q @ surr.abs_c) + n * surr.d
    return surr.anchor @ (weights * surr.gram) - lam * surr.anchor


def apply_D(surrogate: SurrogateData, q: np.ndarray | SimplexWeights) -> np.ndarray:
    """Stacked vector D q of length N d (column-major over frame vectors)."""
    weights = q.q if isinstance(q, SimplexWeights) else np.asarray(q, dtype=np.float64)
    if weights.shape != (surrogate.n_pairs,):
        raise ValueError(f"expected {surrogate.n_pairs} weights, got shape {weights.shape}")
    return _direction_matrix(surrogate, weights).ravel(order="F")


def _adjoint_from_matrix(surr: SurrogateData, y: np.ndarray) -> np.ndarray:
    """4 Re(d_p^H y) for every pair, with y given as a d x N matrix."""
    m = surr.anchor.conj().T @ y
    trace = np.real(np.trace(m))
    cross = np.real(np.conj(surr.c) * m[surr.pair_i, surr.pair_j] + surr.c * m[surr.pair_j, surr.pair_i])
    return 4.0 * (cross - (surr.abs_c + surr.n * surr.d) * trace)


def apply_D_adjoint(surrogate: SurrogateData, y: np.ndarray) -> np.ndarray:
    """Linear part 4 Re(D^H y) of the subgradient, one entry per pair."""
    y = np.asarray(y)
    nd = surrogate.n * surrogate.d
    if y.shape != (nd,):
        raise ValueError(f"expected stacked vector of length {nd}, got shape {y.shape}")
    return _adjoint_from_matrix(surrogate, y.reshape(surrogate.d, surrogate.n, order="F"))


def _blockwise_min(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-ball minimizer of 4 Re(<a, y>) per block and the block norms.

    Zero blocks keep a zero minimizer (any feasible point ties there).
    """
    norms = np.linalg.norm(direction, axis=0)
    safe = np.where(norms < _DEGENERATE_NORM, 1.0, norms)
    y = -direction / safe
    if np.any(norms < _DEGENERATE_NORM):
        y[:, norms < _DEGENERATE_NORM] = 0.0
    return y, norms


def _mda(surr: SurrogateData, config: SolverConfig, budget: int, trail: list | None = None):
    """Entropic mirror ascent on the pair simplex.

    Returns ``(q, direction, iters_used, h_value)`` where ``q`` is the iterate
    with the best inner objective h(q) = -4 sum_i ||(Dq)_i|| + q.s seen, and
    ``direction`` the d x N view of D q for it.
    """
    p = surr.n_pairs
    q = np.full(p, 1.0 / p)
    if trail is not None:
        trail.append(q.copy())
    best_h = -math.inf
    best_q = q
    used = 0
    for k in range(1, budget + 1):
        used = k
        direction = _direction_matrix(surr, q)
        y, norms = _blockwise_min(direction)
        h_val = -4.0 * float(norms.sum()) + float(q @ surr.s)
        if h_val > best_h:
            best_h, best_q = h_val, q
        grad = _adjoint_from_matrix(surr, y) + surr.s
        step = config.mda_sign * config.mda_eta / math.sqrt(k)
        w = step * grad
        w -= w.max()  # overflow guard for the exponential update
        q_next = q * np.exp(w)
        q_next /= q_next.sum()
        if trail is not None:
            trail.append(q_next.copy())
        moved = float(np.abs(q_next - q).sum())
        q = q_next
        if moved < config.mda_q_tol:
            break
    direction = _direction_matrix(surr, q)
    h_val = -4.0 * float(np.linalg.norm(direction, axis=0).sum()) + float(q @ surr.s)
    if h_val > best_h:
        best_h, best_q = h_val, q
        return best_q, direction, used, best_h
    return best_q, _direction_matrix(surr, best_q), used, best_h


def mda_solve(surrogate: SurrogateData, config: SolverConfig) -> tuple[SimplexWeights, np.ndarray]:
    """Solve the inner simplex maximization; return weights and stacked D q."""
    q, direction, _, _ = _mda(surrogate, config, config.inner_iters)
    return SimplexWeights(q), direction.ravel(order="F")


def _column_update(anchor: np.ndarray, direction: np.ndarray) -> tuple[np.ndarray, int]:
    """Closed-form sphere update x_i = -a_i / ||a_i||; degenerate blocks keep
    the anchor column."""
    norms = np.linalg.norm(direction, axis=0)
    dead = norms < _DEGENERATE_NORM
    out = -direction / np.where(dead, 1.0, norms)
    if np.any(dead):
        out[:, dead] = anchor[:, dead]
    return out, int(dead.sum())


def _outer(x: np.ndarray, config: SolverConfig) -> tuple[np.ndarray, dict]:
    """One majorize-then-minimize step on the raw matrix.

    If the fresh iterate would raise the objective (inexact inner solve), the
    inner budget is escalated once -- but only when the first pass did not
    already converge, since the inner solver is deterministic and would just
    retrace itself.  Failing that the anchor is kept, so the traced objective
    stays non-increasing; a kept anchor repeats forever (everything is
    deterministic), which the ``stalled`` flag reports upward.
    """
    surr = build_surrogate(x)
    f_old = 2.0 * float(surr.abs_c.max()) ** 2
    q, direction, used, _ = _mda(surr, config, config.inner_iters)
    x_new, dead = _column_update(x, direction)
    _, f_new = frame_objective(x_new)
    stalled = False
    if f_new > f_old + _DESCENT_SLACK:
        accepted = False
        if used == config.inner_iters:
            q, direction, extra, _ = _mda(surr, config, 4 * config.inner_iters)
            used += extra
            x_try, dead_try = _column_update(x, direction)
            _, f_try = frame_objective(x_try)
            if f_try <= f_old + _DESCENT_SLACK:
                x_new, dead, accepted = x_try, dead_try, True
        if not accepted:
            log.debug("kept anchor: inner solve did not certify descent")
            x_new, dead, stalled = x.copy(), 0, True
    return x_new, {"inner_iters": used, "degenerate": dead, "stalled": stalled}


def outer_step(frame: Frame, config: SolverConfig | None = None) -> Frame:
    """One full outer iteration on a frame."""
    config = config or SolverConfig()
    x_new, _ = _outer(frame.data, config)
    return Frame(frame.field, x_new)


def _stop_bound(d: int, n: int, field: str) -> float:
    try:
        return composite_bound(d, n, field)
    except BoundDomainError:
        return welch_bound(d, n)


def solve(frame0: Frame, config: SolverConfig | None = None) -> tuple[Frame, ConvergenceTrace]:
    """Iterate outer steps (optionally SQUAREM-wrapped) until the coherence
    sits within ``stop_tol`` of the composite bound, the iteration budget is
    spent, or progress stalls.

    Returns the best-coherence iterate ever visited together with the trace.
    """
    config = config or SolverConfig()
    if frame0.n < 2:
        raise ValueError("solve needs at least two frame vectors")
    x = frame0.data.copy()
    bound = _stop_bound(frame0.d, frame0.n, frame0.field)
    mu, f_val = frame_objective(x)
    start = time.perf_counter()
    trace = ConvergenceTrace(bound=bound)
    trace.records.append(TraceRecord(0, mu, f_val, 0, 0.0))
    best_mu, best_x, best_iter = mu, x.copy(), 0
    status = STATUS_MAX_ITERS
    if abs(mu - bound) < config.stop_tol:
        status = STATUS_BOUND_REACHED
    else:
        if config.acceleration == ACCEL_SQUAREM:
            from .accel import _squarem_step as stepper
        else:
            stepper = None
        stall = 0
        f_prev = f_val
        for it in range(1, config.max_outer_iters + 1):
            if stepper is not None:
                x, info = stepper(x, config)
            else:
                x, info = _outer(x, config)
            mu, f_val = frame_objective(x)
            trace.degenerate_events += info["degenerate"]
            for cand_mu, cand_x in info.get("visited", ()):  # squarem inner iterates
                if cand_mu < best_mu:
                    best_mu, best_x, best_iter = cand_mu, cand_x.copy(), it
            if mu < best_mu:
                best_mu, best_x, best_iter = mu, x.copy(), it
            if it % config.trace_every == 0:
                wall = (time.perf_counter() - start) * 1e3
                trace.records.append(
                    TraceRecord(it, mu, f_val, info["inner_iters"], wall,
                                info.get("alpha"), info.get("backtracks"))
                )
            if abs(mu - bound) < config.stop_tol:
                status = STATUS_BOUND_REACHED
                break
            if info["stalled"]:
                # a kept anchor repeats deterministically; the run is over
                status = STATUS_STALLED
                break
            if f_prev - f_val <= _DESCENT_SLACK:
                stall += 1
                if stall >= config.stall_patience:
                    status = STATUS_STALLED
                    break
            else:
                stall = 0
            f_prev = f_val
        if trace.records[-1].iteration != it:
            wall = (time.perf_counter() - start) * 1e3
            trace.records.append(
                TraceRecord(it, mu, f_val, info["inner_iters"], wall,
                            info.get("alpha"), info.get("backtracks"))
            )
    trace.status = status
    trace.best_mu = best_mu
    trace.best_iteration = best_iter
    return Frame(frame0.field, best_x), trace


def ascent_sign_probe(d: int = 3, n: int = 4, iters: int = 20, rng_seed: int = 0) -> int:
    """Empirically pick the exponent sign that makes the inner objective climb.

    Runs short mirror-ascent probes with both signs on a small random frame
    and returns the sign whose h(q) series is the more nearly non-decreasing
    (ties broken by the larger final value).
    """
    from .frame import init_frame

    surr = build_surrogate(init_frame(d, n, "complex", rng_seed=rng_seed))
    scores = {}
    for sign in (1, -1):
        config = SolverConfig(inner_iters=iters, mda_sign=sign, mda_q_tol=1e-300)
        trail: list[np.ndarray] = []
        _mda(surr, config, iters, trail=trail)
        values = []
        for q in trail:
            direction = _direction_matrix(surr, q)
            values.append(-4.0 * float(np.linalg.norm(direction, axis=0).sum()) + float(q @ surr.s))
        drops = sum(1 for a, b in zip(values, values[1:]) if b < a - 1e-12)
        scores[sign] = (drops, -values[-1])
    return min(scores, key=lambda sign: scores[sign])
