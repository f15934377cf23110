"""Unit-norm frame container, pair indexing, coherence, and initialization.

A frame is a d x N matrix (N >= d) whose columns are unit-norm vectors over
the real or complex scalars.  Unordered column pairs (i, j), i < j, are
enumerated row-major over i then j, matching ``numpy.triu_indices``; that flat
position indexes every per-pair quantity in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundDomainError, composite_bound, welch_bound

REAL = "real"
COMPLEX = "complex"

UNIT_NORM_TOL = 1e-12


class FrameError(ValueError):
    """Raised when an array violates the frame invariants."""


class DegenerateFrameError(FrameError):
    """Raised for frames with fewer than two vectors (no pairs exist)."""


def pair_count(n: int) -> int:
    """Number of unordered pairs over ``n`` columns."""
    return n * (n - 1) // 2


def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (i, j) of all unordered pairs in flat order."""
    return np.triu_indices(n, 1)


def flat_index(i: int, j: int, n: int) -> int:
    """Flat position of the unordered pair (i, j), i < j, 0-indexed."""
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < N, got ({i}, {j}) with N={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class PairIndex:
    """Unordered column pair (i, j), i < j, with its flat enumeration index."""

    i: int
    j: int
    flat: int

    @classmethod
    def from_columns(cls, i: int, j: int, n: int) -> "PairIndex":
        if i > j:
            i, j = j, i
        return cls(i, j, flat_index(i, j, n))

    @classmethod
    def from_flat(cls, flat: int, n: int) -> "PairIndex":
        if not 0 <= flat < pair_count(n):
            raise ValueError(f"flat index {flat} out of range for N={n}")
        rows, cols = pair_arrays(n)
        return cls(int(rows[flat]), int(cols[flat]), flat)


@dataclass
class Frame:
    """d x N matrix of unit-norm columns over ``real`` or ``complex`` scalars."""

    field: str
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.field not in (REAL, COMPLEX):
            raise FrameError(f"unknown scalar field: {self.field!r}")
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise FrameError(f"frame data must be 2-d, got shape {data.shape}")
        if self.field == REAL:
            if np.iscomplexobj(data):
                if np.any(data.imag != 0.0):
                    raise FrameError("real frame has nonzero imaginary parts")
                data = data.real
            data = data.astype(np.float64, copy=False)
        else:
            data = data.astype(np.complex128, copy=False)
        d, n = data.shape
        if d < 1 or n < d:
            raise FrameError(f"need N >= d >= 1, got d={d}, N={n}")
        if not np.all(np.isfinite(data)):
            raise FrameError("frame entries must be finite")
        norms = np.linalg.norm(data, axis=0)
        worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if worst > UNIT_NORM_TOL:
            raise FrameError(f"columns must be unit norm within {UNIT_NORM_TOL}, worst deviation {worst:.3e}")
        self.data = data

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def gram(self) -> np.ndarray:
        """N x N matrix of pairwise inner products x_i^H x_j."""
        return self.data.conj().T @ self.data

    def copy(self) -> "Frame":
        return Frame(self.field, self.data.copy())


@dataclass
class CoherenceReport:
    """Mutual coherence of a frame plus the bounds it competes against."""

    mu: float
    argmax_pair: PairIndex
    welch: float
    composite: float
    gram_offdiag_max: float
    gram_offdiag_min: float
    gram_offdiag_mean: float


def normalize_columns(matrix: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Scale every column to unit norm.

    Columns with norm below 1e-14 are replaced by the matching column of
    ``fallback`` when given, else by the canonical basis vector of their index
    modulo d (keeps outputs valid frames deterministically).
    """
    matrix = np.asarray(matrix)
    norms = np.linalg.norm(matrix, axis=0)
    dead = norms < 1e-14
    out = matrix / np.where(dead, 1.0, norms)
    if np.any(dead):
        d = matrix.shape[0]
        for col in np.flatnonzero(dead):
            if fallback is not None:
                out[:, col] = fallback[:, col]
            else:
                out[:, col] = 0.0
                out[col % d, col] = 1.0
    return out


def coherence_of_matrix(matrix: np.ndarray) -> float:
    """Largest normalized |inner product| between distinct columns."""
    x = normalize_columns(matrix)
    g = np.abs(x.conj().T @ x)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def mutual_coherence(frame: Frame) -> CoherenceReport:
    """Coherence report for a valid frame.

    The argmax pair is deterministic: ties resolve to the smallest flat index.
    """
    n = frame.n
    if n < 2:
        raise DegenerateFrameError("mutual coherence needs at least two vectors")
    rows, cols = pair_arrays(n)
    off = np.abs(frame.gram()[rows, cols])
    p = int(np.argmax(off))
    try:
        composite = composite_bound(frame.d, n, frame.field)
    except BoundDomainError:
        composite = math.nan
    return CoherenceReport(
        mu=float(off[p]),
        argmax_pair=PairIndex(int(rows[p]), int(cols[p]), p),
        welch=welch_bound(frame.d, n),
        composite=composite,
        gram_offdiag_max=float(off.max()),
        gram_offdiag_min=float(off.min()),
        gram_offdiag_mean=float(off.mean()),
    )


def _greedy_prune(candidates: np.ndarray, n_keep: int) -> np.ndarray:
    """Drop columns until ``n_keep`` remain, always attacking the worst pair.

    From the pair with the largest |inner product|, the endpoint whose
    next-largest |inner product| is larger gets deleted (ties: lower index).
    """
    m = candidates.shape[1]
    absgram = np.abs(candidates.conj().T @ candidates)
    np.fill_diagonal(absgram, -1.0)
    alive = np.ones(m, dtype=bool)
    for _ in range(m - n_keep):
        rowmax = absgram.max(axis=1)
        rowmax[~alive] = -1.0
        i = int(np.argmax(rowmax))
        j = int(np.argmax(absgram[i]))
        if j < i:
            i, j = j, i
        row_i = absgram[i].copy()
        row_i[j] = -1.0
        row_j = absgram[j].copy()
        row_j[i] = -1.0
        drop = i if row_i.max() >= row_j.max() else j
        alive[drop] = False
        absgram[drop, :] = -1.0
        absgram[:, drop] = -1.0
    return candidates[:, alive]


def init_frame(
    d: int,
    n: int,
    field: str = COMPLEX,
    oversample_factor: float = 4.0,
    rng_seed=0,
) -> Frame:
    """Random unit-norm frame, greedily pruned from an oversampled pool.

    Complex entries are unit-modulus random phases; real entries are standard
    normal.  ``ceil(oversample_factor * N)`` candidates are generated and the
    worst-pair endpoints deleted until N columns remain.  Deterministic for a
    fixed seed.
    """
    if d < 1 or n < d:
        raise FrameError(f"need N >= d >= 1, got d={d}, N={n}")
    if oversample_factor <= 1.0:
        raise ValueError("oversample_factor must exceed 1")
    m = math.ceil(oversample_factor * n)
    if m < n + 1:
        raise ValueError("oversampled pool must exceed N")
    rng = np.random.default_rng(rng_seed)
    if field == COMPLEX:
        phases = rng.random((d, m))
        pool = np.exp(2j * np.pi * phases) / math.sqrt(d)
    elif field == REAL:
        pool = rng.standard_normal((d, m))
        pool = pool / np.linalg.norm(pool, axis=0)
    else:
        raise FrameError(f"unknown scalar field: {field!r}")
    kept = _greedy_prune(pool, n)
    return Frame(field, normalize_columns(kept))
