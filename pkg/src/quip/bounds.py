"""Combinatorial lower bounds for the feasibility-program distance target.

All arithmetic is exact big-integer arithmetic: M**d overflows fixed-width
integers long before reaching interesting problem sizes, and a single
rounding error would invalidate the feasibility guarantee. Comparisons of
the form M**d / S >= n are therefore done cross-multiplied as M**d >= n*S.
"""

from __future__ import annotations

from math import comb


def derangement(l: int) -> int:
    """Number of derangements of l items, exactly.

    Uses the recurrence D_l = l*D_{l-1} + (-1)**l with D_0 = 1, which
    agrees with the alternating-sum formula l! * sum_i (-1)^i / i!.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    D = 1
    for i in range(1, l + 1):
        D = i * D + (-1) ** i
    return D


def derangement_sphere(d: int, k: int) -> int:
    """sum_{l=0}^{k-1} C(d,l) * D_l, the sphere-size sum of the derangement bound."""
    return sum(comb(d, l) * derangement(l) for l in range(k))


def hamming_ball(d: int, r: int, M: int) -> int:
    """Number of points within Hamming distance r of a fixed point in {1..M}^d."""
    return sum(comb(d, l) * (M - 1) ** l for l in range(r + 1))


def _validate(n: int, d: int, M: int) -> None:
    if n < 1 or d < 1 or M < 2:
        raise ValueError(f"need n >= 1, d >= 1, M >= 2, got ({n},{d},{M})")


def derangement_q(n: int, d: int, M: int) -> int:
    """The derangement-sum distance bound: largest k in {1..d} with
    M**d / derangement_sphere(d, k) >= n, or 1 if none qualifies.

    This quantity is reported for reference but is NOT a sound feasibility
    guarantee for all (n, d, M): with the l=1 term vanishing (D_1 = 0) it
    can exceed the Singleton bound, e.g. it returns 2 for (n,d,M)=(3,2,2)
    where no 3-point design of minimum distance 2 exists. Use :func:`q0`
    for the guaranteed-feasible starting distance.
    """
    _validate(n, d, M)
    best = 1
    for k in range(1, d + 1):
        if M**d >= n * derangement_sphere(d, k):
            best = k
    return best


def gilbert_q(n: int, d: int, M: int) -> int:
    """Largest k in {1..d} with M**d >= n * hamming_ball(d, k-1, M), else 0.

    Sphere-covering argument: while fewer than M**d / ball(k-1) points are
    placed, some lattice point lies at distance >= k from all of them, so
    any partial design extends greedily to n points at minimum distance k.
    The k=1 condition is exactly n <= M**d (enough distinct points); when
    even that fails, only distance 0 is guaranteed.
    """
    _validate(n, d, M)
    best = 0
    for k in range(1, d + 1):
        if M**d >= n * hamming_ball(d, k - 1, M):
            best = k
        else:
            break
    return best


def q0(n: int, d: int, M: int) -> int:
    """Distance value guaranteed feasible for an n-point design in {1..M}^d.

    Returns d when n <= M (witness: the constant rows (i, i, ..., i) are at
    mutual distance d), else the sphere-covering bound of :func:`gilbert_q`.
    When n > M the result is always <= d-1, matching the pigeonhole
    observation that two runs must then share a level in every factor.

    When n > M**d, no n distinct points exist and the function returns 0:
    only the duplicate-containing design is guaranteed.
    """
    _validate(n, d, M)
    if n <= M:
        return d
    return gilbert_q(n, d, M)
