"""Lower bounds on achievable mutual coherence for unit-norm frames.

``welch_bound`` is the universal bound; ``composite_bound`` sharpens it for
complex frames once the number of vectors exceeds the squared dimension, and
for real frames through a second-branch term.  ``recoverability_bound`` maps a
coherence value to the sparsity level below which recovery is guaranteed.
"""

from __future__ import annotations

import math


class BoundDomainError(ValueError):
    """Raised when a bound is requested outside its domain of definition."""


def _check_dims(d: int, n: int) -> None:
    if d < 1 or n < d:
        raise BoundDomainError(f"need 1 <= d <= N, got d={d}, N={n}")


def welch_bound(d: int, n: int) -> float:
    """Universal coherence lower bound sqrt((N - d) / (d (N - 1))).

    ``N = 1`` is degenerate (no pairs) and returns 0.
    """
    _check_dims(d, n)
    if n == 1:
        return 0.0
    return math.sqrt((n - d) / (d * (n - 1)))


def composite_bound(d: int, n: int, field: str = "complex") -> float:
    """Sharper coherence lower bound for the given scalar field.

    For complex frames the bound is piecewise in N relative to d**2; for real
    frames it is the maximum of the Welch bound and a second-branch term.
    """
    _check_dims(d, n)
    if n < 2:
        raise BoundDomainError("composite bound needs at least two vectors")

    if field == "real":
        if n == d:
            return 0.0
        second = (3 * n - d * d - 2 * d) / ((d + 2) * (n - d))
        if second <= 0.0:
            return welch_bound(d, n)
        return max(welch_bound(d, n), math.sqrt(second))

    if field != "complex":
        raise ValueError(f"unknown scalar field: {field!r}")

    if n <= d * d:
        return welch_bound(d, n)
    if d == 1:
        raise BoundDomainError("complex bound undefined for d=1 when N > 1")
    orthoplex = math.sqrt((2 * n - d * d - d) / ((d + 1) * (n - d)))
    tail = 1.0 - 2.0 * n ** (-1.0 / (d - 1))
    if n <= 2 * (d * d - 1):
        return max(math.sqrt(1.0 / d), orthoplex, tail)
    return max(orthoplex, tail)


def recoverability_bound(mu: float) -> float:
    """Strict upper bound (1/2)(1 + 1/mu) on the recoverable sparsity.

    ``mu = 0`` (orthonormal equivalent dictionary) returns ``inf``.
    """
    if mu < 0.0 or mu > 1.0:
        raise ValueError(f"coherence must lie in [0, 1], got {mu}")
    if mu == 0.0:
        return math.inf
    return 0.5 * (1.0 + 1.0 / mu)
