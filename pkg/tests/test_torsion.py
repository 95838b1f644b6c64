from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitprimes.arith import divisors, factorize, is_prime, sieve_primes, small_primes
from splitprimes.curves import CurveFp, enumerate_d1_values, group_structure
from splitprimes.torsion import (
    ScanRecord,
    SieveConfig,
    WindowMask,
    admissible_trace,
    count_Pd,
    d1_set,
    deta_bounds,
    deta_member,
    dl_set,
    ds_set,
    dx_count,
    dx_window,
    entanglement_level,
    galois_size_proxy,
    is_totally_split,
    outside_primes,
    p_in_Pd,
    reference_filter,
    scan_outside,
    sx_member,
)
from splitprimes.traces import admissible_traces


def brute_traces(p, d):
    w = math.isqrt(4 * p) + 1
    return [a for a in range(-w, w + 1) if a * a < 4 * p and (a - 2) % d == 0 and (p + 1 - a) % (d * d) == 0]


def test_admissible_trace_examples():
    assert admissible_trace(196561, 140) == 562
    assert admissible_trace(13, 1) == 2
    assert admissible_trace(7, 4) is None


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(small_primes(5000)[2:].tolist()), st.integers(min_value=1, max_value=80))
def test_admissible_traces_brute_force(p, d):
    assert admissible_traces(p, d) == brute_traces(p, d)


def test_is_totally_split():
    E = CurveFp(196561, 6, -2)
    assert is_totally_split(196561, E, 140)
    assert is_totally_split(196561, E, 1)
    E7 = CurveFp(7, 6, 0)
    assert not is_totally_split(7, E7, 3)
    with pytest.raises(ValueError):
        is_totally_split(11, E7, 1)


def test_level_sets():
    assert ds_set(13) == {1, 2, 3}
    assert dl_set(13) == {4}
    # 3 <= 2 * 7^(1/4) ~ 3.25 puts d = 3 among the small levels
    assert ds_set(7) == {1, 2, 3}
    assert dl_set(7) == set()


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43])
def test_d1_set_matches_enumeration(p):
    assert d1_set(p) == enumerate_d1_values(p)


def test_dl_set_brute_force():
    for p in small_primes(3000)[2:].tolist():
        ref = {d for d in range(1, p + 2) if d**4 > 16 * p and brute_traces(p, d)}
        assert dl_set(p) == ref


def test_sieve_config():
    cfg = SieveConfig(0.51)
    assert cfg.theta == Fraction(51, 100)
    assert cfg.delta_sq == Fraction(1, 50)
    assert cfg.in_theorem_range
    assert not SieveConfig(Fraction(3, 5)).in_theorem_range
    for bad in (0.49, 1, 1.2):
        with pytest.raises(ValueError):
            SieveConfig(bad)


@pytest.mark.parametrize("X,theta", [(10**4, 0.55), (131072, 0.8), (10**6, 0.51), (999_983, Fraction(27, 50))])
def test_dx_window_exact(X, theta):
    lo, hi = dx_window(X, theta)
    t = Fraction(theta) if isinstance(theta, Fraction) else Fraction(str(theta))
    # lo < m  iff  m^den > X^num ;  m <= hi  iff  m^den <= 2^den X^num
    num, den = t.numerator, t.denominator
    assert lo**den <= X**num < (lo + 1) ** den
    assert hi**den <= 2**den * X**num < (hi + 1) ** den


def test_sx_member_examples():
    assert sx_member(19600, 10**5, Fraction(35, 100))
    assert sx_member(4, 10**6, Fraction(1, 10))
    assert not sx_member(1, 10**6, Fraction(1, 10))
    with pytest.raises(ValueError):
        sx_member(19601, 10**5, Fraction(35, 100))


def test_sx_member_definition():
    X, delta = 10**5, Fraction(35, 100)
    for d in range(2, 400):
        ref = any(
            e == 1 and X ** float(delta * delta) <= q < X ** float(delta) for q, e in factorize(d).factors
        )
        assert sx_member(d * d, X, delta) == ref


def test_deta_member():
    alpha, eta, D = Fraction(2694, 10000), Fraction(1, 10000), 10**6
    lo, hi = deta_bounds(alpha, eta, D)
    assert lo <= hi
    # r below its interval
    q = 1_000_003
    assert not deta_member(q * max(lo - 1, 1), alpha, eta, D)
    assert not deta_member(D - 1, alpha, eta, D)
    # r ~ D^0.856 leaves room for a small prime cofactor q
    q = next(n for n in range(-(-D // lo), 2 * D // lo + 1) if is_prime(n))
    assert deta_member(lo * q, alpha, eta, D)
    assert not deta_member(2**20, alpha, eta, D)


def test_dx_count_examples():
    assert dx_count(196561, 131072, SieveConfig(Fraction(4, 5))) >= 1
    with pytest.raises(ValueError):
        dx_count(100, 131072, SieveConfig(0.6))


def test_dx_count_zero_when_nothing_in_window():
    X = 10**4
    cfg = SieveConfig(0.55)
    lo, hi = dx_window(X, cfg.theta)
    seen = 0
    for p in sieve_primes(X + 1, 2 * X + 1).primes.tolist():
        if all(not (lo < d * d <= hi) for d in divisors(p - 1)):
            assert dx_count(p, X, cfg) == 0
            seen += 1
    assert seen > 0


def test_filtered_never_exceeds_unfiltered():
    X = 10**6
    cfg = SieveConfig(0.56)
    ps = sieve_primes(X + 1, 2 * X + 1).primes
    rng = np.random.default_rng(0)
    for p in rng.choice(ps, 1000, replace=False).tolist():
        assert dx_count(p, X, cfg, filtered=True) <= dx_count(p, X, cfg)


def test_p_in_Pd():
    assert p_in_Pd(196561, 140)
    assert not p_in_Pd(7, 4)


def test_count_Pd_brute_force():
    X = 10**4
    ps = sieve_primes(X + 1, 2 * X + 1).primes.tolist()
    mask = WindowMask(X)
    for d in range(1, 31):
        ref = sum(1 for p in ps if brute_traces(p, d))
        assert count_Pd(d, X) == ref
        assert count_Pd(d, X, mask) == ref


def test_galois_proxy_examples():
    assert galois_size_proxy(2) == 6
    assert galois_size_proxy(3) == 48
    expected = Fraction(140**4) * Fraction(1, 2) * Fraction(3, 4) * Fraction(4, 5) * Fraction(24, 25)
    expected *= Fraction(6, 7) * Fraction(48, 49)
    assert galois_size_proxy(140) == expected == 92897280
    assert galois_size_proxy(140, "d4") == 140**4
    assert galois_size_proxy(5, "quarter") == 40
    with pytest.raises(ValueError):
        galois_size_proxy(4, "nonsense")
    with pytest.raises(ValueError):
        galois_size_proxy(6, "entangled")


def test_gl2_order_by_counting():
    # |GL2(Z/n)| by direct count of invertible matrices
    for n in range(2, 9):
        cnt = sum(
            1
            for a in range(n)
            for b in range(n)
            for c in range(n)
            for e in range(n)
            if math.gcd((a * e - b * c) % n, n) == 1
        )
        assert galois_size_proxy(n) == cnt


def test_entanglement_level():
    # Delta = -16 * 15552 = -3 * 288^2: Q(sqrt(-3)) has conductor 3
    assert entanglement_level(6, -2) == 6
    # y^2 = x^3 - x has Delta = 64, a square
    assert entanglement_level(-1, 0) == 2
    # y^2 = x^3 + x: Delta = -64, kernel -1, conductor 4
    assert entanglement_level(1, 0) == 4
    assert galois_size_proxy(12, "entangled", (6, -2)) * 2 == galois_size_proxy(12)
    assert galois_size_proxy(10, "entangled", (6, -2)) == galois_size_proxy(10)


def test_scan_record_validates():
    ScanRecord(196561, 140, 562, galois_size_proxy(140))
    with pytest.raises(ValueError):
        ScanRecord(196561, 140, 560, 1)


def test_first_outside_prime():
    recs = scan_outside(6, -2, 200_000)
    assert (recs[0].p, recs[0].d, recs[0].a) == (196561, 140, 562)
    assert outside_primes(recs) == [196561]
    assert all(r.mode == "gl2" for r in recs)


@pytest.mark.parametrize("mode", ["gl2", "d4", "quarter", "entangled"])
def test_filter_equals_exhaustive(mode):
    a = scan_outside(6, -2, 30_000, mode=mode, method="filter")
    b = scan_outside(6, -2, 30_000, mode=mode, method="exhaustive")
    assert a == b


def test_reference_filter_matches_kernel():
    from splitprimes._kernels import may_be_outside

    base = small_primes(1 << 16)
    rng = random.Random(4)
    ps = sieve_primes(10**5, 3 * 10**5).primes.tolist()
    for p in rng.sample(ps, 300):
        A, B = rng.randrange(p), rng.randrange(p)
        if (4 * A**3 + 27 * B * B) % p == 0:
            continue
        assert bool(may_be_outside(p, A, B, base)) == reference_filter(p, A, B)


def test_filter_keeps_every_large_d1():
    # soundness: any p with d1^4 > p must survive the prefilter
    for p in sieve_primes(5, 20_000).primes.tolist():
        if 15552 % p == 0:
            continue
        gs = group_structure(CurveFp(p, 6, -2), verify=False)
        if gs.d1**4 > p:
            assert reference_filter(p, 6, -2)


def test_cm_curve_scan_runs():
    recs = scan_outside(0, 1, 50_000, mode="d4")
    for r in recs:
        assert (r.p - 1) % r.d == 0
        assert r.p < r.d**4


def test_records_are_split_primes():
    recs = scan_outside(6, -2, 200_000, mode="d4")
    assert recs
    for r in recs:
        assert r.p % r.d == 1 % r.d
        assert admissible_trace(r.p, r.d) == r.a or r.a in admissible_traces(r.p, r.d)
