"""Totally split primes in torsion fields, organised by the level d.

A prime p of good reduction is totally split in Q(E[d]) exactly when d
divides d1(p, E).  Over all curves at once, d occurs as some d1 exactly
when an admissible trace exists for (p, d).  That turns questions about
torsion fields into congruence conditions, which is what this module
counts.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import islice
from typing import Iterable, Iterator

import numpy as np

from .arith import (
    as_fraction,
    divisors,
    factorize,
    iter_prime_segments,
    power_ceil,
    power_floor,
    prime_mask,
    primes_in_progression,
    small_primes,
    sqrt_mod,
)
from .curves import CurveFp, GroupStructure, group_structure
from .traces import admissible_trace, admissible_traces, hasse_ok

__all__ = [
    "admissible_trace",
    "admissible_traces",
    "is_totally_split",
    "ds_set",
    "dl_set",
    "d1_set",
    "SieveConfig",
    "dx_window",
    "dx_count",
    "sx_member",
    "deta_member",
    "deta_bounds",
    "galois_size_proxy",
    "entanglement_level",
    "PROXY_MODES",
    "ScanRecord",
    "scan_outside",
    "outside_candidates",
    "records_from",
    "outside_primes",
    "reference_filter",
    "p_in_Pd",
    "count_Pd",
    "WindowMask",
]

PROXY_MODES = ("gl2", "d4", "quarter", "entangled")


# -- single-prime sets --------------------------------------------------------


def is_totally_split(p: int, curve: CurveFp, d: int, gs: GroupStructure | None = None) -> bool:
    if curve.p != p:
        raise ValueError("curve is defined over a different field")
    if gs is None:
        gs = group_structure(curve)
    return gs.d1 % d == 0


def _small_level(d: int, p: int) -> bool:
    """d <= 2 p^(1/4), decided in integers."""
    return d**4 <= 16 * p


def ds_set(p: int) -> set[int]:
    return {d for d in divisors(p - 1) if _small_level(d, p)}


def dl_set(p: int) -> set[int]:
    # an admissible trace forces d | p - 1, so the divisors of p - 1 are
    # the only candidates
    return {d for d in divisors(p - 1) if not _small_level(d, p) and admissible_traces(p, d)}


def d1_set(p: int) -> set[int]:
    return ds_set(p) | dl_set(p)


# -- sieve parameters and families of levels ---------------------------------


@dataclass(frozen=True)
class SieveConfig:
    """theta = 1/2 + epsilon and delta^2 = 2 epsilon.

    The asymptotic statements need theta < 3/5; ``in_theorem_range``
    reports that, but larger theta is allowed for exploratory counts.
    """

    theta: Fraction
    eta: Fraction = Fraction(1, 10_000)

    def __post_init__(self):
        object.__setattr__(self, "theta", as_fraction(self.theta))
        object.__setattr__(self, "eta", as_fraction(self.eta))
        if not Fraction(1, 2) <= self.theta < 1:
            raise ValueError(f"theta must lie in [1/2, 1), got {self.theta}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def epsilon(self) -> Fraction:
        return self.theta - Fraction(1, 2)

    @property
    def delta_sq(self) -> Fraction:
        return 2 * self.epsilon

    @property
    def delta(self) -> float:
        return math.sqrt(self.delta_sq)

    @property
    def in_theorem_range(self) -> bool:
        return self.theta < Fraction(3, 5)


@lru_cache(maxsize=256)
def dx_window(X: int, theta) -> tuple[int, int]:
    """Integers (lo, hi) with X^theta < m <= 2 X^theta  iff  lo < m <= hi."""
    t = as_fraction(theta)
    return power_floor(X, t), power_floor(2**t.denominator * X**t.numerator, Fraction(1, t.denominator))


@lru_cache(maxsize=4096)
def _sx_bounds(X: int, delta_sq, delta) -> tuple[int, int]:
    """q is admissible in S_X(delta) iff qlo <= q < qhi."""
    return power_ceil(X, delta_sq), power_ceil(X, delta)


def sx_member(dsq: int, X: int, delta, delta_sq=None) -> bool:
    """dsq = r^2 q^2 with q prime in [X^(delta^2), X^delta) and gcd(r, q) = 1."""
    d = math.isqrt(dsq)
    if d * d != dsq:
        raise ValueError(f"{dsq} is not a perfect square")
    if delta_sq is None:
        f = as_fraction(delta) if not isinstance(delta, float) or len(str(delta)) < 12 else None
        delta_sq = f * f if f is not None else float(delta) ** 2
    qlo, qhi = _sx_bounds(X, delta_sq, delta)
    if d == 1:
        return False
    return any(e == 1 and qlo <= q < qhi for q, e in factorize(d).factors)


@lru_cache(maxsize=4096)
def deta_bounds(alpha, eta, D: int) -> tuple[int, int]:
    """r range [lo, hi] (integers) for the family D_eta(alpha, D)."""
    a, e = as_fraction(alpha), as_fraction(eta)
    base = 1 / (2 * a) - 1
    return power_ceil(D, base - 2 * e), power_floor(D, base - e)


def deta_member(d: int, alpha, eta, D: int) -> bool:
    if not D <= d <= 2 * D:
        return False
    lo, hi = deta_bounds(alpha, eta, D)
    if lo > hi:
        return False
    return any(lo <= d // q <= hi for q, _ in factorize(d).factors)


def dx_count(p: int, X: int, cfg: SieveConfig, filtered: bool = False) -> int:
    """|D_X(p; theta)|, or |D_X(p; theta, delta)| when ``filtered``."""
    if not X < p <= 2 * X:
        raise ValueError(f"p={p} is outside (X, 2X] for X={X}")
    lo, hi = dx_window(X, cfg.theta)
    n = 0
    for d in divisors(p - 1):
        if lo < d * d <= hi and admissible_traces(p, d):
            if not filtered or sx_member(d * d, X, cfg.delta, cfg.delta_sq):
                n += 1
    return n


# -- the sets P(d) ------------------------------------------------------------


def p_in_Pd(p: int, d: int) -> bool:
    return admissible_trace(p, d) is not None


class WindowMask:
    """Primality of the integers in (X, 2X], shared between many levels d."""

    def __init__(self, X: int):
        self.X = X
        self.mask = prime_mask(X + 1, 2 * X + 1)

    def count(self, r: int, m: int, floor: int) -> int:
        """#{p prime: p = r (mod m), max(X, floor) < p <= 2X}."""
        lo = max(self.X, floor) + 1
        start = lo + ((r - lo) % m)
        if start > 2 * self.X:
            return 0
        return int(np.count_nonzero(self.mask[start - self.X - 1 :: m]))


def _classes(d: int, X: int) -> Iterator[tuple[int, int]]:
    """(residue mod d^2, smallest |a| in it) over a = 2 (mod d), a^2 < 8X."""
    m = d * d
    best: dict[int, int] = {}
    amax = math.isqrt(8 * X - 1)
    a = -amax + ((2 + amax) % d)
    while a <= amax:
        r = (a - 1) % m
        if r not in best or abs(a) < best[r]:
            best[r] = abs(a)
        a += d
    return iter(sorted(best.items()))


def count_Pd(d: int, X: int, mask: WindowMask | None = None) -> int:
    """#{p in (X, 2X] : some curve over F_p has d1 = d}.

    p belongs to P(d) iff p = a - 1 (mod d^2) for an a = 2 (mod d) with
    a^2 < 4p, so each residue class only needs its smallest |a|.
    """
    if d < 1:
        raise ValueError("d must be positive")
    m = d * d
    total = 0
    for r, amin in _classes(d, X):
        floor = amin * amin // 4  # p > a^2/4  iff  p > floor(a^2/4)
        if mask is not None:
            total += mask.count(r, m, floor)
        else:
            lo = max(X, floor) + 1
            if lo <= 2 * X:
                total += len(primes_in_progression(r, m, lo, 2 * X + 1))
    return total


# -- outside primes -----------------------------------------------------------


def _squarefree_kernel(n: int) -> int:
    sign = -1 if n < 0 else 1
    out = 1
    for q, e in factorize(abs(n)).factors:
        if e % 2:
            out *= q
    return sign * out


@lru_cache(maxsize=64)
def entanglement_level(A: int, B: int) -> int:
    """Smallest m such that |G_d| <= |GL2(Z/d)| / 2 whenever m divides d.

    Q(sqrt(Delta)) lies in Q(E[2]).  If Delta is a square that already
    cuts G_2 to index 2 (m = 2).  Otherwise Q(sqrt(Delta)) is also inside
    the cyclotomic field of its conductor f, hence inside Q(E[f]), and
    the two sign characters agree on G_d once lcm(2, f) divides d.
    """
    delta = -16 * _discriminant_part(A, B)
    k = _squarefree_kernel(delta)
    if k == 1:
        return 2
    f = abs(k) if k % 4 == 1 else 4 * abs(k)
    return math.lcm(2, f)


def galois_size_proxy(d: int, mode: str = "gl2", curve: tuple[int, int] | None = None) -> int:
    """Stand-in for |Gal(Q(E[d])/Q)|.

    gl2 is |GL2(Z/d)|, the largest the image can be.  d4 is d^4.  quarter
    is ceil(d^4/16), so p < proxy is exactly d > 2 p^(1/4).  entangled
    halves gl2 at levels where the discriminant of the curve (A, B) forces
    an index-2 image; it needs ``curve``.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if mode in ("gl2", "entangled"):
        out = d**4
        for q, _ in factorize(d).factors:
            out = out // q**3 * (q - 1) * (q * q - 1)
        if mode == "entangled":
            if curve is None:
                raise ValueError("the entangled proxy needs the curve coefficients")
            if d % entanglement_level(*curve) == 0:
                out //= 2
        return out
    if mode == "d4":
        return d**4
    if mode == "quarter":
        return -(-(d**4) // 16)
    raise ValueError(f"unknown proxy mode {mode!r}")


@dataclass(frozen=True)
class ScanRecord:
    p: int
    d: int
    a: int
    galois_proxy: int
    mode: str = "gl2"
    curve: CurveFp | None = field(default=None, compare=False)

    def __post_init__(self):
        p, d, a = self.p, self.d, self.a
        if not hasse_ok(a, p) or (a - 2) % d or (p + 1 - a) % (d * d):
            raise ValueError(f"({p}, {d}, {a}) is not an admissible trace")


def _discriminant_part(A: int, B: int) -> int:
    return 4 * A**3 + 27 * B**2


def _records_for(gs: GroupStructure, curve: CurveFp, mode: str, coeffs: tuple[int, int]) -> list[ScanRecord]:
    out = []
    for d in sorted(divisors(gs.d1), reverse=True):
        proxy = galois_size_proxy(d, mode, coeffs)
        if gs.p < proxy:
            out.append(ScanRecord(gs.p, d, gs.a_p, proxy, mode, curve))
    return out


def reference_filter(p: int, A: int, B: int) -> bool:
    """Pure-Python twin of the compiled prefilter, for cross-checks and p >= 2^31."""
    curve = CurveFp(p, A, B)
    pts = []
    x = 1
    while len(pts) < 2 and x < p:
        y = sqrt_mod(curve.rhs(x), p)
        if y:
            pts.append((x, y))
        x += 1
    r, w = math.isqrt(p), math.isqrt(4 * p)
    tested = set()
    for d in divisors(p - 1):
        dd = d * d
        if dd <= r:
            continue
        for N in range(-(-(p + 1 - w) // dd) * dd, p + 2 + w, dd):
            if N in tested or not hasse_ok(p + 1 - N, p):
                continue
            tested.add(N)
            if all(curve.mul(N, P) is None for P in pts):
                return True
    return False


def _filter_segment(primes: np.ndarray, A: int, B: int) -> np.ndarray:
    from ._kernels import KERNEL_P_LIMIT, filter_block

    out = np.zeros(primes.shape[0], dtype=np.bool_)
    small = primes < KERNEL_P_LIMIT
    if small.any():
        sub = np.ascontiguousarray(primes[small], dtype=np.int64)
        flags = np.zeros(sub.shape[0], dtype=np.bool_)
        filter_block(sub, np.int64(A), np.int64(B), small_primes(1 << 16), flags)
        out[small] = flags
    for i in np.flatnonzero(~small):
        out[i] = reference_filter(int(primes[i]), A, B)
    return out


def _good_segments(A: int, B: int, lo: int, hi: int) -> Iterator[np.ndarray]:
    disc = _discriminant_part(A, B)
    for seg in iter_prime_segments(lo, hi):
        seg = seg.astype(np.int64)
        # primes dividing the discriminant have bad reduction
        if abs(disc) < 1 << 62:
            keep = np.int64(abs(disc)) % seg != 0
        else:
            keep = np.fromiter((disc % int(q) != 0 for q in seg), dtype=np.bool_, count=seg.shape[0])
        yield seg[keep]


def outside_candidates(
    A: int,
    B: int,
    p_max: int,
    method: str = "filter",
    threads: int = 1,
    cache=None,
    p_min: int = 5,
    seed: int = 0,
) -> list[tuple[CurveFp, GroupStructure]]:
    """Exact group structures at every good prime that could be outside.

    With ``method="filter"`` only primes passing the compiled order test
    are examined; that test keeps every p with d1(p)^4 > p, which covers
    all proxy modes.  ``"exhaustive"`` examines every good prime.
    """
    if method not in ("filter", "exhaustive"):
        raise ValueError(f"unknown method {method!r}")
    if _discriminant_part(A, B) == 0:
        raise ValueError("the curve is singular over Q")
    if p_max > 1 << 63:
        raise ValueError("p_max must be at most 2^63")
    lo = max(p_min, 5)
    if p_max < lo:
        return []

    def candidates(seg: np.ndarray) -> np.ndarray:
        if method == "exhaustive":
            return seg
        return seg[_filter_segment(seg, A, B)]

    segments = _good_segments(A, B, lo, p_max + 1)
    survivors: list[int] = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            while True:
                batch = list(islice(segments, 2 * threads))
                if not batch:
                    break
                for res in pool.map(candidates, batch):
                    survivors.extend(int(q) for q in res)
    else:
        for seg in segments:
            survivors.extend(int(q) for q in candidates(seg))

    out = []
    for p in survivors:
        curve = CurveFp(p, A, B)
        cached = cache.get(p, A, B) if cache is not None else None
        gs = group_structure(curve, seed=seed, a_p=cached)
        if cache is not None and cached is None:
            cache.put(p, A, B, gs.a_p)
        out.append((curve, gs))
    return out


def records_from(
    structures: Iterable[tuple[CurveFp, GroupStructure]], mode: str, A: int, B: int
) -> list[ScanRecord]:
    """Outside records of the curve (A, B) from precomputed group structures."""
    if mode not in PROXY_MODES:
        raise ValueError(f"unknown proxy mode {mode!r}")
    records = [r for curve, gs in structures for r in _records_for(gs, curve, mode, (A, B))]
    records.sort(key=lambda r: (r.p, -r.d))
    return records


def scan_outside(
    A: int,
    B: int,
    p_max: int,
    mode: str = "gl2",
    method: str = "filter",
    threads: int = 1,
    cache=None,
    p_min: int = 5,
    seed: int = 0,
) -> list[ScanRecord]:
    """Outside-prime records of y^2 = x^3 + Ax + B for good primes p <= p_max.

    One record per (p, d) with d | d1(p) and p < galois_size_proxy(d),
    sorted by p and then by decreasing d.  Both methods give the same
    records; ``"filter"`` is much faster.
    """
    if mode not in PROXY_MODES:
        raise ValueError(f"unknown proxy mode {mode!r}")
    return records_from(outside_candidates(A, B, p_max, method, threads, cache, p_min, seed), mode, A, B)


def outside_primes(records: Iterable[ScanRecord]) -> list[int]:
    return sorted({r.p for r in records})
