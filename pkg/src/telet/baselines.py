"""Alternating-projection constructions of low-coherence tight frames.

Classic Gram-matrix methods: alternate a structural projection (shrink the
off-diagonal magnitudes to a threshold, reset the diagonal to one) with a
spectral projection onto the nearest alpha-tight matrix, then extract the
frame from the top-d eigenpairs.  The variants differ only in the shrink
threshold and the tightness constant.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bounds import welch_bound
from .frame import Frame, coherence_of_matrix, init_frame, normalize_columns
from .solver import _stop_bound
from .trace import (
    STATUS_BOUND_REACHED,
    STATUS_MAX_ITERS,
    ConvergenceTrace,
    TraceRecord,
)

VARIANTS = ("tropp", "xiong", "katsaggelos")

ALPHA_SQRT_N_OVER_D = "sqrt_n_over_d"
ALPHA_N_OVER_D = "n_over_d"
ALPHA_MEAN_TOP_EIGS = "mean_top_d_eigs"


@dataclass
class APVariant:
    """Shrink threshold and tightness rule of one alternating-projection flavor."""

    name: str
    eta: float
    alpha_rule: str

    @classmethod
    def named(cls, name: str, d: int, n: int) -> "APVariant":
        if name == "tropp":
            return cls(name, math.sqrt(1.0 / d), ALPHA_SQRT_N_OVER_D)
        if name == "xiong":
            return cls(name, math.sqrt(1.0 / d), ALPHA_MEAN_TOP_EIGS)
        if name == "katsaggelos":
            return cls(name, welch_bound(d, n), ALPHA_SQRT_N_OVER_D)
        raise ValueError(f"unknown variant {name!r}; expected one of {VARIANTS}")


def shrink(gram: np.ndarray, eta: float) -> np.ndarray:
    """Clip off-diagonal magnitudes above ``eta`` (phase kept); unit diagonal.

    Entries at magnitude exactly ``eta`` are untouched.
    """
    if eta <= 0:
        raise ValueError("shrink threshold must be positive")
    out = np.array(gram, copy=True)
    mags = np.abs(out)
    np.fill_diagonal(mags, 0.0)
    over = mags > eta
    out[over] *= eta / mags[over]
    np.fill_diagonal(out, 1.0)
    return out


def _ordered_eigpairs(gram: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by eigenvalue descending; exact ties resolve by the
    lexicographic order of the eigenvector entries' real parts."""
    values, vectors = np.linalg.eigh(gram)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    start = 0
    while start < values.size:
        stop = start
        while stop + 1 < values.size and values[stop + 1] == values[start]:
            stop += 1
        if stop > start:
            tied = sorted(range(start, stop + 1), key=lambda k: tuple(np.real(vectors[:, k])))
            vectors[:, start : stop + 1] = vectors[:, tied]
        start = stop + 1
    return values, vectors


def nearest_alpha_tight(gram: np.ndarray, alpha: float, rank: int) -> np.ndarray:
    """Project onto alpha times the projector of the top-``rank`` eigenspace."""
    _, vectors = _ordered_eigpairs(gram)
    top = vectors[:, :rank]
    return alpha * (top @ top.conj().T)


def _tightness(rule: str, d: int, n: int, top_eigs: np.ndarray) -> float:
    if rule == ALPHA_SQRT_N_OVER_D:
        return math.sqrt(n / d)
    if rule == ALPHA_N_OVER_D:
        return n / d
    if rule == ALPHA_MEAN_TOP_EIGS:
        return float(np.real(top_eigs).mean())
    raise ValueError(f"unknown tightness rule {rule!r}")


def _extract_frame(vectors: np.ndarray, d: int) -> np.ndarray:
    # eigenvalues of the alpha-tight Gram are all alpha, so the scaled rows of
    # the top eigenbasis renormalize to the same frame regardless of alpha
    return normalize_columns(vectors[:, :d].conj().T)


def alternating_projection(
    d: int,
    n: int,
    variant: str = "tropp",
    max_iters: int = 10_000,
    seed: int = 0,
    field: str = "complex",
    stop_tol: float = 1e-5,
    alpha_rule: str | None = None,
    oversample_factor: float = 4.0,
    trace_every: int = 1,
) -> tuple[Frame, ConvergenceTrace]:
    """Run the named alternating-projection variant from a random start.

    Traces the coherence of the frame extracted at every iteration and
    returns the minimum-coherence iterate visited.  ``alpha_rule`` overrides
    the variant's tightness constant (``n_over_d`` exposes the trace-N
    alternative to ``sqrt_n_over_d``).
    """
    spec = APVariant.named(variant, d, n)
    if alpha_rule is not None:
        spec.alpha_rule = alpha_rule
    x0 = init_frame(d, n, field, oversample_factor=oversample_factor, rng_seed=seed)
    gram = x0.gram()
    bound = _stop_bound(d, n, field)
    start = time.perf_counter()
    trace = ConvergenceTrace(bound=bound)
    mu0 = coherence_of_matrix(x0.data)
    trace.records.append(TraceRecord(0, mu0, 2.0 * mu0 * mu0, 0, 0.0))
    best_mu, best_x, best_iter = mu0, x0.data.copy(), 0
    status = STATUS_MAX_ITERS
    for it in range(1, max_iters + 1):
        shrunk = shrink(gram, spec.eta)
        values, vectors = _ordered_eigpairs(shrunk)
        alpha = _tightness(spec.alpha_rule, d, n, values[:d])
        top = vectors[:, :d]
        gram = alpha * (top @ top.conj().T)
        x = _extract_frame(vectors, d)
        mu = coherence_of_matrix(x)
        if mu < best_mu:
            best_mu, best_x, best_iter = mu, x, it
        if it % trace_every == 0 or it == max_iters:
            wall = (time.perf_counter() - start) * 1e3
            trace.records.append(TraceRecord(it, mu, 2.0 * mu * mu, 0, wall))
        if abs(mu - bound) < stop_tol:
            status = STATUS_BOUND_REACHED
            if trace.records[-1].iteration != it:
                wall = (time.perf_counter() - start) * 1e3
                trace.records.append(TraceRecord(it, mu, 2.0 * mu * mu, 0, wall))
            break
    trace.status = status
    trace.best_mu = best_mu
    trace.best_iteration = best_iter
    return Frame(field, best_x), trace
