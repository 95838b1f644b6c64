"""Compiled prefilter for outside-prime scans.

A prime p can only carry an outside record if d1(p) > p^(1/4), because
every Galois-size proxy is at most d^4.  d1 divides p - 1 and d1^2
divides #E(F_p), so it is enough to try, for each divisor d of p - 1 with
d^4 > p, the multiples N of d^2 in the Hasse window and check [N]P = O on
two points.  The true group order always passes, so the filter never
drops a genuine record; survivors are re-examined exactly in Python.

The ladder works on x-coordinates only, so no square roots or inversions
are needed.  All products stay below 2^62, which caps p at 2^31.
"""
from __future__ import annotations

import numpy as np
from numba import njit

KERNEL_P_LIMIT = 1 << 31


@njit(cache=True, nogil=True)
def _isqrt(n):
    r = np.int64(np.sqrt(np.float64(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True, nogil=True)
def _powmod(b, e, p):
    out = np.int64(1)
    b %= p
    while e > 0:
        if e & 1:
            out = out * b % p
        b = b * b % p
        e >>= 1
    return out


@njit(cache=True, nogil=True)
def ladder_kills(x, n, a, b, p):
    """True iff [n]P = O for a point P on y^2 = x^3 + ax + b with x(P) = x != 0."""
    X0, Z0 = np.int64(1), np.int64(0)
    X1, Z1 = x % p, np.int64(1)
    top = 0
    while (n >> top) > 1:
        top += 1
    for i in range(top, -1, -1):
        # differential addition R0 + R1, difference P
        x0z1 = X0 * Z1 % p
        x1z0 = X1 * Z0 % p
        z01 = Z0 * Z1 % p
        t = (X0 * X1 - a * z01) % p
        sx = X0 * Z1 % p + X1 * Z0 % p
        XA = (t * t - 4 * b % p * z01 % p * (sx % p)) % p
        u = (x0z1 - x1z0) % p
        ZA = x * (u * u % p) % p
        if (n >> i) & 1:
            X2, Z2 = X1, Z1
            X0, Z0 = XA, ZA
        else:
            X2, Z2 = X0, Z0
            X1, Z1 = XA, ZA
        # doubling
        xx = X2 * X2 % p
        zz = Z2 * Z2 % p
        s = (xx - a * zz) % p
        XD = (s * s - 8 * b % p * X2 % p * (Z2 * zz % p)) % p
        ZD = 4 * Z2 % p * ((X2 * xx + a * X2 % p * zz + b * Z2 % p * zz) % p) % p
        if (n >> i) & 1:
            X1, Z1 = XD, ZD
        else:
            X0, Z0 = XD, ZD
    return Z0 == 0


@njit(cache=True, nogil=True)
def _two_x(p, a, b):
    out = np.zeros(2, dtype=np.int64)
    k = 0
    x = np.int64(1)
    while k < 2 and x < p:
        r = (x * x % p * x + a * x + b) % p
        if r != 0 and _powmod(r, (p - 1) // 2, p) == 1:
            out[k] = x
            k += 1
        x += 1
    return out, k


@njit(cache=True, nogil=True)
def may_be_outside(p, a, b, base):
    m = p - 1
    qs = np.zeros(32, dtype=np.int64)
    es = np.zeros(32, dtype=np.int64)
    nf = 0
    for q in base:
        if q * q > m:
            break
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            qs[nf] = q
            es[nf] = e
            nf += 1
    if m > 1:
        qs[nf] = m
        es[nf] = 1
        nf += 1

    ndiv = 1
    for i in range(nf):
        ndiv *= es[i] + 1
    divs = np.ones(ndiv, dtype=np.int64)
    cur = 1
    for i in range(nf):
        q, e = qs[i], es[i]
        pw = np.int64(1)
        for k in range(1, e + 1):
            pw *= q
            for j in range(cur):
                divs[k * cur + j] = divs[j] * pw
        cur *= e + 1

    r = _isqrt(p)
    w = _isqrt(4 * p)
    lo = p + 1 - w
    hi = p + 1 + w
    xs, nx = _two_x(p, a, b)
    tested = np.zeros(64, dtype=np.int64)
    ntested = 0
    for i in range(ndiv):
        d = divs[i]
        dd = d * d
        if dd <= r or dd > hi:
            continue
        N = (lo + dd - 1) // dd * dd
        while N <= hi:
            t = p + 1 - N
            if t * t < 4 * p:
                seen = False
                for k in range(ntested):
                    if tested[k] == N:
                        seen = True
                        break
                if not seen:
                    ok = True
                    for k in range(nx):
                        if not ladder_kills(xs[k], N, a, b, p):
                            ok = False
                            break
                    if ok:
                        return True
                    if ntested < 64:
                        tested[ntested] = N
                        ntested += 1
            N += dd
    return False


@njit(cache=True, nogil=True)
def filter_block(primes, A, B, base, out):
    for i in range(primes.shape[0]):
        p = primes[i]
        a = ((A % p) + p) % p
        b = ((B % p) + p) % p
        out[i] = may_be_outside(p, a, b, base)
