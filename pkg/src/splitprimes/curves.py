"""Short Weierstrass curves over prime fields and their group structure.

Points are plain tuples ``(x, y)`` with ``None`` standing for the point at
infinity.  The group E(F_p) is always isomorphic to Z/d1 + Z/d1*d2; this
module computes (d1, d2) exactly and checks the result against the
arithmetic constraints any such group must satisfy.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from .arith import factorize, is_prime, legendre, sqrt_mod
from .traces import admissible_traces, hasse_ok

Point = Optional[Tuple[int, int]]

CHAR_SUM_LIMIT = 1 << 20
ENUM_VERIFY_LIMIT = 1000
EXHAUSTIVE_LIMIT = 10_000
ORDER_SAMPLES = 8
ORDER_SAMPLES_MAX = 32


class SingularCurveError(ValueError):
    pass


class GroupStructureError(RuntimeError):
    """An invariant failed after the sampling budget was spent."""

    def __init__(self, message, p=None, A=None, B=None, N=None, exponent=None):
        super().__init__(f"{message} (p={p}, A={A}, B={B}, N={N}, e={exponent})")
        self.p, self.A, self.B, self.N, self.exponent = p, A, B, N, exponent


class SearchBudgetExceeded(RuntimeError):
    """An admissible trace exists but no curve was found within the budget."""


@dataclass(frozen=True)
class CurveFp:
    p: int
    A: int
    B: int

    def __post_init__(self):
        p = self.p
        if p <= 3 or not is_prime(p):
            raise ValueError(f"p must be a prime > 3, got {p}")
        object.__setattr__(self, "A", self.A % p)
        object.__setattr__(self, "B", self.B % p)
        if (4 * self.A**3 + 27 * self.B**2) % p == 0:
            raise SingularCurveError(f"y^2 = x^3 + {self.A}x + {self.B} is singular mod {p}")

    def rhs(self, x: int) -> int:
        return (x * x * x + self.A * x + self.B) % self.p

    def contains(self, P: Point) -> bool:
        if P is None:
            return True
        x, y = P
        return (y * y - self.rhs(x)) % self.p == 0

    def twist(self) -> "CurveFp":
        """Quadratic twist by the smallest non-residue."""
        g = 2
        while legendre(g, self.p) != -1:
            g += 1
        return CurveFp(self.p, g * g * self.A, g**3 * self.B)

    def random_point(self, rng: random.Random) -> Tuple[int, int]:
        p = self.p
        while True:
            x = rng.randrange(p)
            y = sqrt_mod(self.rhs(x), p)
            if y is not None:
                return (x, y if rng.random() < 0.5 else (-y) % p)

    # group law -----------------------------------------------------------

    def neg(self, P: Point) -> Point:
        if P is None:
            return None
        return (P[0], (-P[1]) % self.p)

    def add(self, P: Point, Q: Point) -> Point:
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + self.A) * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def mul(self, k: int, P: Point) -> Point:
        if k < 0:
            return self.mul(-k, self.neg(P))
        out = None
        while k:
            if k & 1:
                out = self.add(out, P)
            P = self.add(P, P)
            k >>= 1
        return out

    def points(self) -> list[Tuple[int, int]]:
        """All affine points, by a square-root table (small p only)."""
        p = self.p
        xs = np.arange(p, dtype=np.int64)
        root = np.full(p, -1, dtype=np.int64)
        root[(xs * xs) % p] = xs
        rhs = ((xs * xs % p) * xs + self.A * xs + self.B) % p
        out = []
        for x, y in zip(xs.tolist(), root[rhs].tolist()):
            if y < 0:
                continue
            out.append((x, y))
            if y:
                out.append((x, p - y))
        return out


@dataclass(frozen=True)
class GroupStructure:
    p: int
    N: int
    a_p: int
    d1: int
    d2: int

    @property
    def exponent(self) -> int:
        return self.d1 * self.d2

    def violations(self) -> list[str]:
        p, N, a, d1, d2 = self.p, self.N, self.a_p, self.d1, self.d2
        bad = []
        if N != p + 1 - a:
            bad.append("N != p + 1 - a_p")
        if not hasse_ok(a, p):
            bad.append("Hasse bound")
        if d1 < 1 or d2 < 1 or d1 * d1 * d2 != N:
            bad.append("d1^2 d2 != N")
        elif (p - 1) % d1:
            bad.append("d1 does not divide p - 1")
        elif (p - a + 1) % (d1 * d1) or (a - 2) % d1:
            bad.append("trace congruences")
        return bad


# -- point counting ----------------------------------------------------------


def _char_sum_trace(curve: CurveFp) -> int:
    p = curve.p
    xs = np.arange(p, dtype=np.int64)
    square = np.zeros(p, dtype=bool)
    square[(xs * xs) % p] = True
    rhs = ((xs * xs % p) * xs + curve.A * xs + curve.B) % p
    nonzero = rhs != 0
    residues = np.count_nonzero(square[rhs] & nonzero)
    return -(2 * residues - np.count_nonzero(nonzero))


def point_order(curve: CurveFp, P: Point, multiple: int, fac=None) -> int:
    """Exact order of P given any multiple of it."""
    if curve.mul(multiple, P) is not None:
        raise ValueError("multiple is not a multiple of the order")
    n = multiple
    for q, _ in (fac or factorize(multiple)).factors:
        while n % q == 0 and curve.mul(n // q, P) is None:
            n //= q
    return n


def _find_multiple(curve: CurveFp, P: Point) -> int:
    """Some M in the Hasse interval with [M]P = O, by baby-step giant-step."""
    p = curve.p
    w = math.isqrt(4 * p)
    lo = p + 1 - w
    m = math.isqrt(2 * w) + 1
    baby = {}
    R = None
    for j in range(m):
        if R is None:
            if j:
                return j
        else:
            baby.setdefault(R[0], j)
        R = curve.add(R, P)
    step = curve.mul(m, P)
    G = curve.mul(lo, P)
    for i in range(2 * w // m + 2):
        if G is None:
            return lo + i * m
        j = baby.get(G[0])
        if j is not None:
            Rj = curve.mul(j, P)
            t = i * m + j if Rj == curve.neg(G) else i * m - j
            return lo + t
        G = curve.add(G, step)
    raise GroupStructureError("no multiple of the point order in the Hasse interval", p, curve.A, curve.B)


def _hasse_multiples(p: int, n: int, limit: int = 64) -> list[int] | None:
    """Multiples of n in the Hasse interval, or None if there are more than limit."""
    w = math.isqrt(4 * p)
    lo, hi = p + 1 - w, p + 1 + w
    first = -(-lo // n) * n
    if (hi - first) // n >= limit:
        return None
    return [N for N in range(first, hi + 1, n) if hasse_ok(p + 1 - N, p)]


def _order_candidates(curve: CurveFp, rng: random.Random, budget: int) -> list[int] | None:
    """Hasse-interval group orders consistent with sampled point orders."""
    lcm = 1
    cands = None
    for _ in range(budget):
        P = curve.random_point(rng)
        M = _find_multiple(curve, P)
        lcm = math.lcm(lcm, point_order(curve, P, M))
        cands = _hasse_multiples(curve.p, lcm)
        if cands is not None and len(cands) == 1:
            break
    return cands


def _bsgs_order(curve: CurveFp, seed: int) -> int:
    rng = random.Random(seed)
    p = curve.p
    cands = _order_candidates(curve, rng, ORDER_SAMPLES)
    if cands is not None and len(cands) == 1:
        return cands[0]
    twist_cands = _order_candidates(curve.twist(), rng, ORDER_SAMPLES)
    if cands is None or twist_cands is None:
        both = cands or [2 * p + 2 - N for N in twist_cands or []]
    else:
        both = [N for N in cands if 2 * p + 2 - N in twist_cands]
    if len(both) != 1:
        raise GroupStructureError(f"ambiguous group order {both}", p, curve.A, curve.B)
    return both[0]


def count_points(curve: CurveFp, seed: int = 0) -> tuple[int, int]:
    """(N, a_p) with N = #E(F_p) = p + 1 - a_p."""
    p = curve.p
    if p < CHAR_SUM_LIMIT:
        a = _char_sum_trace(curve)
    else:
        a = p + 1 - _bsgs_order(curve, seed)
    if not hasse_ok(a, p):
        raise GroupStructureError("trace violates the Hasse bound", p, curve.A, curve.B, p + 1 - a)
    return p + 1 - a, a


# -- group structure ---------------------------------------------------------


def _ell_exponent(curve: CurveFp, P: Point, ell: int) -> int:
    t = 0
    while P is not None:
        P = curve.mul(ell, P)
        t += 1
    return t


def _dlog_prime_order(curve: CurveFp, g: Point, h: Point, ell: int) -> int | None:
    """x in [0, ell) with [x]g = h, where g has prime order ell; None if h not in <g>."""
    if ell <= 64:
        R = None
        for x in range(ell):
            if R == h:
                return x
            R = curve.add(R, g)
        return None
    m = math.isqrt(ell) + 1
    table = {}
    R = None
    for j in range(m):
        table.setdefault(R, j)
        R = curve.add(R, g)
    giant = curve.neg(curve.mul(m, g))
    G = h
    for i in range(m + 1):
        j = table.get(G)
        if j is not None:
            return (i * m + j) % ell
        G = curve.add(G, giant)
    return None


def _in_cyclic(curve: CurveFp, X: Point, P: Point, t: int, ell: int) -> bool:
    """Whether X lies in <P>, where P has order ell^t."""
    m = _ell_exponent(curve, X, ell)
    if m == 0:
        return True
    if m > t:
        return False
    G = curve.mul(ell ** (t - m), P)
    gamma = curve.mul(ell ** (m - 1), G)
    x = 0
    for i in range(m):
        h = curve.mul(ell ** (m - 1 - i), curve.add(X, curve.neg(curve.mul(x, G))))
        digit = _dlog_prime_order(curve, gamma, h, ell)
        if digit is None:
            return False
        x += digit * ell**i
    return curve.mul(x, G) == X


def _sylow_d1_exponent(curve: CurveFp, ell: int, v: int, N: int, rng: random.Random) -> int:
    """s with ell^s || d1, certified by two points that generate the ell-Sylow subgroup.

    The subgroup H has order ell^v and rank at most two.  Once sampled P, R
    satisfy |<P, R>| = ell^v, H = <P, R> and its exponent is the larger of
    the two orders, so s = v - t exactly.
    """
    cofactor = N // ell**v
    best, best_t = None, 0
    for _ in range(ORDER_SAMPLES_MAX):
        R = curve.mul(cofactor, curve.random_point(rng))
        t = _ell_exponent(curve, R, ell)
        if t > best_t:
            best, best_t = R, t
            if t == v:
                return 0
            continue
        j = 0
        X = R
        while not _in_cyclic(curve, X, best, best_t, ell):
            X = curve.mul(ell, X)
            j += 1
        if best_t + j == v:
            return v - best_t
    raise GroupStructureError(
        f"{ell}-Sylow subgroup not generated within {ORDER_SAMPLES_MAX} samples",
        curve.p, curve.A, curve.B, N,
    )


def group_structure(
    curve: CurveFp, seed: int = 0, verify: bool | None = None, a_p: int | None = None
) -> GroupStructure:
    """(N, a_p, d1, d2) with E(F_p) = Z/d1 + Z/d1*d2.

    Only primes ell with ell | p - 1 and ell^2 | N can divide d1; for each
    of those the ell-part is computed from sampled points.  Below
    ``ENUM_VERIFY_LIMIT`` the answer is also checked by full enumeration
    unless ``verify`` is False.  A known trace (from a cache) may be passed
    as ``a_p``; it is still checked against the group law.
    """
    p = curve.p
    if a_p is None:
        N, a = count_points(curve, seed)
    else:
        N, a = p + 1 - a_p, a_p
        if not hasse_ok(a, p) or curve.mul(N, curve.random_point(random.Random(seed))) is not None:
            raise GroupStructureError("supplied trace is inconsistent with the curve", p, curve.A, curve.B, N)
    rng = random.Random(seed)
    d1 = 1
    for ell, v in factorize(N).factors:
        if v >= 2 and (p - 1) % ell == 0:
            d1 *= ell ** _sylow_d1_exponent(curve, ell, v, N, rng)
    gs = GroupStructure(p, N, a, d1, N // (d1 * d1))
    bad = gs.violations()
    if bad:
        raise GroupStructureError("; ".join(bad), p, curve.A, curve.B, N, N // d1)
    if verify is None:
        verify = p < ENUM_VERIFY_LIMIT
    if verify:
        ref = structure_by_enumeration(curve)
        if ref != gs:
            raise GroupStructureError(f"enumeration disagrees: {ref}", p, curve.A, curve.B, N, N // d1)
    return gs


def torsion_count(curve: CurveFp, m: int, points: Iterable[Tuple[int, int]]) -> int:
    """#{P in E(F_p) : [m]P = O}, over the given affine points plus infinity."""
    return 1 + sum(1 for P in points if curve.mul(m, P) is None)


def structure_by_enumeration(curve: CurveFp) -> GroupStructure:
    """Group structure from the full point list.

    d1 is the largest d with d^2 | N whose full d-torsion is rational,
    i.e. exactly d^2 points are killed by d.
    """
    pts = curve.points()
    p, N = curve.p, len(pts) + 1
    d1 = 1
    for d in sorted(factorize(N).divisors(), reverse=True):
        if N % (d * d) == 0 and torsion_count(curve, d, pts) == d * d:
            d1 = d
            break
    return GroupStructure(p, N, p + 1 - N, d1, N // (d1 * d1))


# -- searches ----------------------------------------------------------------


def iso_classes(p: int) -> Iterable[CurveFp]:
    """One representative per F_p-isomorphism class of nonsingular curves.

    (A, B) and (u^4 A, u^6 B) are isomorphic; every other pair in the orbit
    is skipped.
    """
    seen = bytearray(p * p)
    u4 = [pow(u, 4, p) for u in range(1, p)]
    u6 = [pow(u, 6, p) for u in range(1, p)]
    for A in range(p):
        for B in range(p):
            if seen[A * p + B]:
                continue
            for s4, s6 in zip(u4, u6):
                seen[(s4 * A % p) * p + s6 * B % p] = 1
            if (4 * A**3 + 27 * B * B) % p:
                yield CurveFp(p, A, B)


def enumerate_d1_values(p: int, verify: bool | None = None) -> set[int]:
    """{d1(E) : E/F_p nonsingular}, by running over every curve class."""
    if p > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive enumeration is limited to p <= {EXHAUSTIVE_LIMIT}")
    return {group_structure(E, verify=verify).d1 for E in iso_classes(p)}


def _quick_order_test(curve: CurveFp, targets: list[int], rng: random.Random) -> bool:
    P = curve.random_point(rng)
    return any(curve.mul(N, P) is None for N in targets)


def curve_with_d1(p: int, d: int, seed: int = 0, budget: int = 200_000) -> CurveFp | None:
    """A curve over F_p with d1 = d, or None when no admissible trace exists.

    Small p are searched in lexicographic (A, B) order, larger p at random.
    Raises SearchBudgetExceeded when a trace exists but nothing was found.
    """
    traces = admissible_traces(p, d)
    if not traces:
        return None
    targets = [p + 1 - a for a in traces]
    rng = random.Random(seed)
    if p < EXHAUSTIVE_LIMIT:
        pairs = ((A, B) for A in range(p) for B in range(p))
    else:
        pairs = ((rng.randrange(p), rng.randrange(p)) for _ in range(budget))
    for tried, (A, B) in enumerate(pairs):
        if tried >= budget:
            break
        if (4 * A**3 + 27 * B * B) % p == 0:
            continue
        E = CurveFp(p, A, B)
        if not _quick_order_test(E, targets, rng):
            continue
        if group_structure(E, seed=seed).d1 == d:
            return E
    raise SearchBudgetExceeded(f"no curve with d1={d} over F_{p} within {budget} tries")
