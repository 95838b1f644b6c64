"""Integer and modular arithmetic primitives.

Everything here is a pure function of its arguments.  Prime tables are
memoized per process; sieving is segmented so memory stays
O(sqrt(hi) + segment) regardless of the range length.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

SEGMENT_SIZE = 1 << 20
SPF_LIMIT = 1 << 22
TRIAL_BOUND = 1000
MAX_INPUT = 1 << 64

# valid for every n < 3.3e24, which covers the full 64-bit range
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class PrimeRange:
    lo: int
    hi: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes.tolist())


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def primes(self) -> list[int]:
        return [q for q, _ in self.factors]

    def value(self) -> int:
        out = 1
        for q, e in self.factors:
            out *= q**e
        return out

    def divisors(self) -> list[int]:
        divs = [1]
        for q, e in self.factors:
            divs = [d * q**k for d in divs for k in range(e + 1)]
        return sorted(divs)


# -- sieving ---------------------------------------------------------------


@lru_cache(maxsize=8)
def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    mask[4::2] = False
    for q in range(3, math.isqrt(limit) + 1, 2):
        if mask[q]:
            mask[q * q :: 2 * q] = False
    return np.flatnonzero(mask).astype(np.int64)


def _base_primes(hi: int) -> np.ndarray:
    # round the bound up so nearby calls share one cached table
    need = math.isqrt(max(hi - 1, 1)) + 1
    bound = 1 << max(need.bit_length(), 10)
    return small_primes(bound)


def _segment_mask(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality mask for the integers in [lo, hi)."""
    mask = np.ones(hi - lo, dtype=bool)
    for q in base.tolist():
        qq = q * q
        if qq >= hi:
            break
        start = max(qq, -(-lo // q) * q)
        mask[start - lo :: q] = False
    if lo < 2:
        mask[: 2 - lo] = False
    return mask


def _check_range(lo: int, hi: int) -> None:
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid range [{lo}, {hi})")
    if hi > 1 << 63:
        raise ValueError("upper bound exceeds 2^63")


def iter_prime_segments(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> Iterator[np.ndarray]:
    """Yield the primes of [lo, hi) one segment at a time, in order."""
    _check_range(lo, hi)
    lo = max(lo, 2)
    if hi <= lo:
        return
    base = _base_primes(hi)
    for start in range(lo, hi, segment):
        stop = min(start + segment, hi)
        mask = _segment_mask(start, stop, base)
        yield np.flatnonzero(mask).astype(np.int64) + start


def prime_mask(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> np.ndarray:
    """Boolean array m with m[i] true iff lo + i is prime, for [lo, hi)."""
    _check_range(lo, hi)
    out = np.zeros(hi - lo, dtype=bool)
    if hi <= 2:
        return out
    base = _base_primes(hi)
    for start in range(lo, hi, segment):
        stop = min(start + segment, hi)
        out[start - lo : stop - lo] = _segment_mask(start, stop, base)
    return out


def sieve_primes(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> PrimeRange:
    """All primes in [lo, hi) by a segmented sieve."""
    if not (2 <= lo < hi):
        raise ValueError(f"need 2 <= lo < hi, got lo={lo}, hi={hi}")
    _check_range(lo, hi)
    chunks = list(iter_prime_segments(lo, hi, segment))
    primes = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return PrimeRange(lo, hi, primes)


def primes_in_progression(r: int, m: int, lo: int, hi: int) -> np.ndarray:
    """Primes n in [lo, hi) with n = r (mod m), sieving the progression itself."""
    if m < 1:
        raise ValueError("modulus must be positive")
    _check_range(lo, hi)
    lo = max(lo, 2)
    first = lo + ((r - lo) % m)
    if first >= hi:
        return np.zeros(0, dtype=np.int64)
    count = (hi - 1 - first) // m + 1
    if math.gcd(first, m) != 1:
        return np.array([first], dtype=np.int64) if count and is_prime(first) else np.zeros(0, dtype=np.int64)
    keep = np.ones(count, dtype=bool)
    for q in _base_primes(hi).tolist():
        if q * q >= hi:
            break
        if m % q == 0:
            continue
        # first + k*m = 0 (mod q)  <=>  k = -first * m^-1 (mod q)
        k0 = (-first * pow(m, -1, q)) % q
        if first + k0 * m == q:
            k0 += q
        keep[k0::q] = False
    return first + m * np.flatnonzero(keep).astype(np.int64)


# -- primality and factoring -----------------------------------------------


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 2^64 (and well beyond)."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1)
def _spf_table() -> np.ndarray:
    spf = np.zeros(SPF_LIMIT, dtype=np.int32)
    for q in small_primes(math.isqrt(SPF_LIMIT)).tolist():
        block = spf[q * q :: q]
        block[block == 0] = q
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    return spf


def _rho(n: int, seed: int = 1) -> int:
    """A nontrivial factor of composite odd n (Brent's variant)."""
    rng = random.Random(seed)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if n < SPF_LIMIT:
        spf = _spf_table()
        while n > 1:
            q = int(spf[n])
            out[q] = out.get(q, 0) + 1
            n //= q
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    f = _rho(n)
    _split(f, out)
    _split(n // f, out)


def factorize(n: int) -> Factorization:
    """Complete factorization of 1 <= n < 2^64."""
    if not (1 <= n < MAX_INPUT):
        raise ValueError(f"factorize needs 1 <= n < 2^64, got {n}")
    out: dict[int, int] = {}
    m = n
    if m >= SPF_LIMIT:
        for q in small_primes(TRIAL_BOUND).tolist():
            if q * q > m:
                break
            while m % q == 0:
                out[q] = out.get(q, 0) + 1
                m //= q
    _split(m, out)
    return Factorization(n, tuple(sorted(out.items())))


def divisors(n: int) -> list[int]:
    return factorize(n).divisors()


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    out = n
    for q, _ in factorize(n).factors:
        out -= out // q
    return out


def phi_square(d: int) -> int:
    """phi(d^2), which equals d * phi(d)."""
    return d * euler_phi(d)


# -- real powers of integers, decided exactly ------------------------------

EXACT_DENOMINATOR_LIMIT = 10**6


def iroot(n: int, k: int) -> int:
    """floor(n^(1/k)) for n >= 0."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    # Newton from a power of two above the root decreases monotonically
    r = 1 << (n.bit_length() // k + 1)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def as_fraction(x) -> Fraction:
    """Read a float as the decimal it prints as (0.5388 -> 1347/2500)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


def power_floor(x: int, e) -> int:
    """floor(x^e) for an integer x >= 1, exact when e is a tame rational."""
    if x < 1:
        raise ValueError("power_floor needs x >= 1")
    f = as_fraction(e) if not isinstance(e, float) or len(str(e)) < 12 else None
    if f is not None and f.denominator <= EXACT_DENOMINATOR_LIMIT:
        if f < 0:
            return 1 if x == 1 else 0
        return iroot(x**f.numerator, f.denominator)
    return math.floor(x ** float(e))


def power_ceil(x: int, e) -> int:
    """ceil(x^e); with power_floor this turns m < x^e into m < power_ceil(x, e)."""
    f = as_fraction(e) if not isinstance(e, float) or len(str(e)) < 12 else None
    if f is not None and f.denominator <= EXACT_DENOMINATOR_LIMIT:
        if f < 0:
            return 1
        n = x**f.numerator
        r = iroot(n, f.denominator)
        return r if r**f.denominator == n else r + 1
    return math.ceil(x ** float(e))


# -- quadratic residues ----------------------------------------------------


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a modulo the odd prime p (Tonelli-Shanks), or None."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# -- constants -------------------------------------------------------------


@dataclass(frozen=True)
class ZetaConstants:
    zeta2: float
    zeta3: float
    zeta6: float
    euler_gamma: float
    exp_neg_gamma: float

    @property
    def c(self) -> float:
        """zeta(2) zeta(3) / zeta(6), the mean value of n/phi(n)."""
        return self.zeta2 * self.zeta3 / self.zeta6


_EM_TERMS = 10
_EM_CUTOFF = 20


@lru_cache(maxsize=1)
def _bernoulli_even() -> list[Fraction]:
    """B_0, B_1, ..., B_{2K} by the standard recurrence (exact)."""
    top = 2 * _EM_TERMS + 2
    b = [Fraction(0)] * (top + 1)
    b[0] = Fraction(1)
    for m in range(1, top + 1):
        b[m] = -sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1)
    return b


def _zeta(s: int) -> float:
    """zeta(s) for integer s >= 2 by Euler-Maclaurin.

    Head sum to N-1 = 19, tail through B_20.  The remainder is bounded by
    the first omitted term, |B_22| s(s+1)...(s+20) / (22! N^{s+21}), which
    is below 1e-20 for every s >= 2.
    """
    n = _EM_CUTOFF
    b = _bernoulli_even()
    terms = [k ** -float(s) for k in range(1, n)]
    terms.append(n ** (1.0 - s) / (s - 1))
    terms.append(0.5 * n ** -float(s))
    rising = float(s)
    for k in range(1, _EM_TERMS + 1):
        terms.append(float(b[2 * k]) / math.factorial(2 * k) * rising * n ** (-s - 2 * k + 1.0))
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return math.fsum(terms)


def _euler_gamma() -> float:
    """Euler's constant from H_N - log N - 1/2N + sum B_2k / (2k N^2k).

    With N = 20 and ten correction terms the truncation error is below
    |B_22| / (22 N^22) < 1e-26, far under double precision.
    """
    n = _EM_CUTOFF
    b = _bernoulli_even()
    terms = [1.0 / k for k in range(1, n + 1)]
    terms += [-math.log(n), -0.5 / n]
    terms += [float(b[2 * k]) / (2 * k * n ** (2 * k)) for k in range(1, _EM_TERMS + 1)]
    return math.fsum(terms)


# one literal per constant, used only as a cross-check on the series above
_REFERENCE = {
    "zeta2": math.pi**2 / 6,
    "zeta3": 1.2020569031595942,
    "zeta6": math.pi**6 / 945,
    "euler_gamma": 0.5772156649015329,
}


@lru_cache(maxsize=1)
def zeta_constants() -> ZetaConstants:
    z2, z3, z6, g = _zeta(2), _zeta(3), _zeta(6), _euler_gamma()
    for name, value in zip(("zeta2", "zeta3", "zeta6", "euler_gamma"), (z2, z3, z6, g)):
        if abs(value - _REFERENCE[name]) > 1e-13:
            raise ArithmeticError(f"series for {name} disagrees with reference: {value!r}")
    return ZetaConstants(z2, z3, z6, g, math.exp(-g))
