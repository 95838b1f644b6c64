"""Main terms and empirical statistics for the splitting sets.

Counts here are exact; "main terms" are the smooth approximations they
are compared against.  Every report is a dataclass that serializes to
JSON and back without loss.
"""
from __future__ import annotations

import json
import math
import statistics
import warnings
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from .arith import (
    as_fraction,
    euler_phi,
    iter_prime_segments,
    phi_square,
    power_floor,
    prime_mask,
    primes_in_progression,
    sieve_primes,
    zeta_constants,
)
from .torsion import SieveConfig, WindowMask, count_Pd, deta_member, dx_window

THRESHOLDS = (0.5, 1.0)
DETA_ALPHA = Fraction(2694, 10_000)
SMOOTH_C = 3.0


class EmptyWindowWarning(UserWarning):
    pass


# -- serialization ------------------------------------------------------------


def _encode(v):
    if isinstance(v, Fraction):
        return {"__fraction__": [v.numerator, v.denominator]}
    if isinstance(v, dict):
        return {str(k): _encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    return v


def _decode(v):
    if isinstance(v, dict):
        if "__fraction__" in v:
            n, d = v["__fraction__"]
            return Fraction(n, d)
        return {k: _decode(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_decode(x) for x in v]
    return v


class Report:
    """Mixin: JSON round-trip for flat report dataclasses."""

    def to_json(self) -> str:
        return json.dumps(_encode(asdict(self)), sort_keys=True)

    @classmethod
    def from_json(cls, text: str):
        raw = _decode(json.loads(text))
        return cls(**{f.name: raw[f.name] for f in fields(cls)})


# -- the theta-window main term -------------------------------------------------


def _trace_progression(d: int, X: int) -> tuple[int, int]:
    """(first a, count) for a = 2 (mod d) with a^2 < 8X."""
    amax = math.isqrt(8 * X - 1)
    a0 = -amax + ((2 + amax) % d)
    n = 0 if a0 > amax else (amax - a0) // d + 1
    return a0, n


def inner_exact(d: int, X: int) -> Fraction:
    """sum over a = 2 (d), |a| < 2 sqrt(2X) of (2X - a^2/4) / phi(d^2), in closed form."""
    a0, n = _trace_progression(d, X)
    if n == 0:
        return Fraction(0)
    sum_a2 = n * a0 * a0 + a0 * d * n * (n - 1) + d * d * (n - 1) * n * (2 * n - 1) // 6
    return Fraction(8 * X * n - sum_a2, 4 * phi_square(d))


def inner_sum_collapsed(d: int, X: int) -> float:
    """inner_exact(d, X) / log X."""
    return float(inner_exact(d, X)) / math.log(X)


def inner_sum_naive(d: int, X: int) -> float:
    a0, n = _trace_progression(d, X)
    total = 0.0
    for k in range(n):
        a = a0 + k * d
        total += (2 * X - a * a / 4) / (phi_square(d) * math.log(X))
    return total


def _levels(X: int, theta) -> range:
    lo, hi = dx_window(X, theta)
    return range(math.isqrt(lo) + 1, math.isqrt(hi) + 1)


def main_term_sum(X: int, theta, method: str = "collapsed") -> float:
    """The double sum over X^theta < d^2 <= 2X^theta and admissible-shaped a."""
    if X < 1000:
        raise ValueError("X must be at least 1000")
    inner = {"collapsed": inner_sum_collapsed, "naive": inner_sum_naive}[method]
    levels = _levels(X, theta)
    if len(levels) == 0:
        warnings.warn(f"empty level window at X={X}, theta={theta}", EmptyWindowWarning)
        return 0.0
    return math.fsum(inner(d, X) for d in levels)


def main_term_exact(X: int, levels) -> Fraction:
    """log X times the main term, summed exactly over an arbitrary set of levels."""
    return sum((inner_exact(d, X) for d in levels), Fraction(0))


def closed_form_constant() -> float:
    z = zeta_constants()
    return 1575 * z.zeta3 * math.sqrt(2) / (4 * math.pi**4)


def asymptotic_main_term_constant() -> float:
    """Leading constant of main_term_sum * log X / X^(3/2 - theta).

    The a-sum is (16 sqrt 2 / 3) X^(3/2) / d to first order, and
    sum over the window of 1/(d^2 phi(d)) is c X^(-theta) / 4 where c is
    the mean value of d / phi(d).
    """
    return 4 * math.sqrt(2) / 3 * zeta_constants().c


def main_term_closed(X: int, theta) -> float:
    t = float(as_fraction(theta))
    return closed_form_constant() * X ** (1.5 - t) / math.log(X)


@dataclass(frozen=True)
class MainTermReport(Report):
    X: int
    theta: Fraction
    sum_value: float
    closed_form: float
    ratio: float
    empty: bool = False


def main_term_report(X: int, theta) -> MainTermReport:
    theta = as_fraction(theta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EmptyWindowWarning)
        s = main_term_sum(X, theta)
    closed = main_term_closed(X, theta)
    return MainTermReport(X, theta, s, closed, s / closed, bool(caught))


# -- summatory functions of D_s and D_l ----------------------------------------


def ds_summatory(X: int) -> tuple[int, float]:
    """(sum over p <= X of |D_s(p)|, c) with c = zeta(2) zeta(3) / zeta(6).

    Counted level-first: d contributes the primes p = 1 (mod d) with
    d^4/16 < p <= X.
    """
    if X > 10**9:
        raise ValueError("X must be at most 10^9")
    if X < 2:
        return 0, zeta_constants().c
    dmax = 1
    while (dmax + 1) ** 4 <= 16 * X:
        dmax += 1
    total = 0
    for seg in iter_prime_segments(2, X + 1):
        seg = seg.astype(np.int64)
        for d in range(1, dmax + 1):
            total += int(np.count_nonzero(((seg - 1) % d == 0) & (16 * seg > d**4)))
    return total, zeta_constants().c


def dl_summatory(X: int) -> tuple[int, float]:
    """(sum over p <= X of |D_l(p)|, its main term).

    For d > 2 p^(1/4) an admissible trace is unique, so counting pairs
    (a, p) with p = a - 1 (mod d^2) and a^2/4 < p < d^4/16 counts each
    (p, d) once.  The main term replaces each progression count by
    pi(interval) / phi(d^2).
    """
    if X > 10**8:
        raise ValueError("X must be at most 10^8")
    if X < 5:
        return 0, 0.0
    mask = prime_mask(0 + 2, X + 1)  # index i is the integer i + 2
    primes = np.flatnonzero(mask) + 2

    def pi(y: int) -> int:
        return int(np.searchsorted(primes, y, side="right"))

    value = 0
    main = 0.0
    amax_global = math.isqrt(4 * X - 1)
    # d^2 divides p + 1 - a, which is at most X + 1 + amax
    for d in range(2, math.isqrt(X + 1 + amax_global) + 1):
        m = d * d
        top = min(X, (d**4 - 1) // 16)  # p < d^4 / 16
        amax = min(amax_global, math.isqrt(max(4 * top - 1, 0)))
        a = -amax + ((2 + amax) % d)
        phi = phi_square(d)
        while a <= amax:
            lo = a * a // 4 + 1  # p > a^2 / 4
            if lo <= top:
                first = lo + ((a - 1 - lo) % m)
                if first <= top:
                    value += int(np.count_nonzero(mask[first - 2 : top - 1 : m]))
                main += (pi(top) - pi(lo - 1)) / phi
            a += d
    return value, main


# -- discrepancy over a family of levels ----------------------------------------


@dataclass(frozen=True)
class DiscrepancyRow(Report):
    d: int
    observed: int
    expected: float
    relative_error: float


@dataclass(frozen=True)
class DiscrepancySummary(Report):
    X: int
    theta: Fraction
    family: str
    n_levels: int
    empty: bool
    observed_total: int
    expected_total: float
    median_relative_error: float
    fraction_over: dict = field(default_factory=dict)


def expected_count(d: int, X: int) -> float:
    return inner_sum_collapsed(d, X)


def _family_levels(X: int, cfg: SieveConfig, family: str) -> list[int]:
    if family == "all_window":
        return list(_levels(X, cfg.theta))
    if family == "deta":
        D = power_floor(X, DETA_ALPHA)
        return [d for d in range(D, 2 * D + 1) if deta_member(d, DETA_ALPHA, cfg.eta, D)]
    raise ValueError(f"unknown family {family!r}")


def discrepancy_scan(X: int, cfg: SieveConfig, family: str = "all_window"):
    """Per-level comparison of #P(d) in (X, 2X] with the main-term shape."""
    if X > 10**8:
        raise ValueError("X must be at most 10^8")
    levels = _family_levels(X, cfg, family)
    mask = WindowMask(X) if levels else None
    rows = []
    for d in levels:
        obs = count_Pd(d, X, mask)
        exp = expected_count(d, X)
        rows.append(DiscrepancyRow(d, obs, exp, abs(obs - exp) / exp))
    errs = [r.relative_error for r in rows]
    summary = DiscrepancySummary(
        X=X,
        theta=cfg.theta,
        family=family,
        n_levels=len(rows),
        empty=not rows,
        observed_total=sum(r.observed for r in rows),
        expected_total=math.fsum(r.expected for r in rows),
        median_relative_error=statistics.median(errs) if errs else math.nan,
        fraction_over={str(t): (sum(e > t for e in errs) / len(errs) if errs else 0.0) for t in THRESHOLDS},
    )
    return rows, summary


# -- classical sanity bounds ------------------------------------------------------


def brun_titchmarsh_check(Y: int, q: int, a: int, slack: float = 0.2) -> bool:
    """pi(Y; q, a) <= (2 + slack) Y / (phi(q) log(Y/q))."""
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    if q < 1 or q > Y**0.9:
        raise ValueError("need 1 <= q <= Y^0.9")
    count = len(primes_in_progression(a % q, q, 2, Y + 1))
    return count <= (2 + slack) * Y / (euler_phi(q) * math.log(Y / q))


def smooth_count(Y: int, Z: int) -> int:
    """#{n in (Y, 2Y] : every prime factor of n is < Z}."""
    if not 2 <= Z <= Y:
        raise ValueError("need 2 <= Z <= Y")
    if Z == 2:
        return 0  # no primes below Z, and 1 is not in (Y, 2Y]
    rem = np.arange(Y + 1, 2 * Y + 1, dtype=np.int64)
    for p in sieve_primes(2, Z).primes:
        p = int(p)
        pk = p
        while pk <= 2 * Y:
            start = (-(Y + 1)) % pk
            rem[start::pk] //= p
            pk *= p
    return int(np.count_nonzero(rem == 1))


def smooth_count_check(Y: int, Z: int, C: float = SMOOTH_C) -> bool:
    return smooth_count(Y, Z) <= C * Y * math.exp(-math.log(Y) / (2 * math.log(Z)))
