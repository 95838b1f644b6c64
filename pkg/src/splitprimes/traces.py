"""Admissible Frobenius traces for a prescribed full-torsion level.

An integer a is admissible for (p, d) when |a| < 2 sqrt(p), a = 2 (mod d)
and d^2 divides p + 1 - a.  These are exactly the traces that a curve
over F_p with d1 = d can have.
"""
from __future__ import annotations

import math


def hasse_ok(a: int, p: int) -> bool:
    """|a| < 2 sqrt(p), decided in integers."""
    return a * a < 4 * p


def admissible_traces(p: int, d: int) -> list[int]:
    """Every admissible a for (p, d), in increasing order."""
    if d < 1:
        raise ValueError("d must be positive")
    w = math.isqrt(4 * p)
    m = d * d
    lo = p + 1 - w
    out = []
    # N = p + 1 - a runs over multiples of d^2 inside the Hasse window
    n = -(-lo // m) * m
    while n <= p + 1 + w:
        a = p + 1 - n
        if hasse_ok(a, p) and (a - 2) % d == 0:
            out.append(a)
        n += m
    out.sort()
    return out


def admissible_trace(p: int, d: int) -> int | None:
    """The canonical admissible trace: the one closest to 2, larger on ties.

    For d > 2 p^(1/4) there is at most one candidate; that uniqueness is
    asserted rather than assumed.
    """
    traces = admissible_traces(p, d)
    if not traces:
        return None
    if d**4 > 16 * p and len(traces) > 1:
        raise AssertionError(f"non-unique admissible trace for p={p}, d={d}: {traces}")
    return min(traces, key=lambda a: (abs(a - 2), -a))
