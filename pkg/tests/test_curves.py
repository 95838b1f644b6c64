from __future__ import annotations

import random

import pytest

from splitprimes.curves import (
    CurveFp,
    GroupStructureError,
    SingularCurveError,
    _bsgs_order,
    _char_sum_trace,
    count_points,
    curve_with_d1,
    enumerate_d1_values,
    group_structure,
    iso_classes,
    structure_by_enumeration,
)
from splitprimes.arith import small_primes


def test_count_points_examples():
    assert count_points(CurveFp(5, 1, 1)) == (9, -3)
    assert count_points(CurveFp(7, 6, 0)) == (8, 0)


def test_group_structure_examples():
    gs = group_structure(CurveFp(5, 1, 1))
    assert (gs.d1, gs.d2) == (1, 9)
    gs = group_structure(CurveFp(7, 6, 0))
    assert (gs.d1, gs.d2) == (2, 2)


def test_structure_at_196561():
    E = CurveFp(196561, 6, -2)
    N, a = count_points(E)
    assert (N, a) == (196000, 562)
    # independent character sum on this single prime
    assert _char_sum_trace(E) == 562
    gs = group_structure(E)
    assert gs.d1 == 140 and gs.d2 == 10


def test_singular_rejected():
    with pytest.raises(SingularCurveError):
        CurveFp(7, 0, 0)
    with pytest.raises(ValueError):
        CurveFp(9, 1, 1)


def test_bsgs_matches_character_sum():
    rng = random.Random(1)
    for p in (1009, 65537, 104729, 999983):
        for _ in range(5):
            A, B = rng.randrange(p), rng.randrange(p)
            if (4 * A**3 + 27 * B * B) % p == 0:
                continue
            E = CurveFp(p, A, B)
            assert _bsgs_order(E, seed=3) == p + 1 - _char_sum_trace(E)


def test_large_prime_order_kills_points():
    p = (1 << 61) - 1
    E = CurveFp(p, 2, 3)
    N, a = count_points(E, seed=5)
    assert a * a < 4 * p
    rng = random.Random(0)
    for _ in range(3):
        assert E.mul(N, E.random_point(rng)) is None


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17, 29, 31, 37, 73])
def test_structure_matches_enumeration(p):
    for E in iso_classes(p):
        assert group_structure(E, verify=False) == structure_by_enumeration(E)


def test_structure_above_enumeration_limit():
    rng = random.Random(7)
    for p in small_primes(3000)[-20:].tolist():
        A, B = rng.randrange(p), rng.randrange(p)
        if (4 * A**3 + 27 * B * B) % p == 0:
            continue
        E = CurveFp(p, A, B)
        assert group_structure(E, verify=False) == structure_by_enumeration(E)


def test_twist_trace_flips_sign():
    E = CurveFp(10007, 3, 7)
    assert count_points(E.twist())[1] == -count_points(E)[1]


def test_supplied_trace_checked():
    E = CurveFp(196561, 6, -2)
    assert group_structure(E, a_p=562).d1 == 140
    with pytest.raises(GroupStructureError):
        group_structure(E, a_p=560)
    with pytest.raises(GroupStructureError):
        group_structure(E, a_p=10**6)


def test_enumerate_d1_values():
    assert enumerate_d1_values(5) == {1, 2}
    assert enumerate_d1_values(7) == {1, 2, 3}
    assert {1, 2, 3} <= enumerate_d1_values(13)
    with pytest.raises(ValueError):
        enumerate_d1_values(10_007)


@pytest.mark.slow
def test_curve_with_d1():
    E = curve_with_d1(7, 3)
    assert count_points(E) == (9, -1)
    assert curve_with_d1(7, 4) is None
    E = curve_with_d1(196561, 140, seed=1, budget=2_000_000)
    assert E is not None
    gs = group_structure(E)
    assert gs.d1 == 140 and gs.a_p == 562
