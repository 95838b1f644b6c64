from __future__ import annotations

import math
import random
import warnings
from fractions import Fraction

import pytest

from splitprimes.analytic import (
    DiscrepancyRow,
    DiscrepancySummary,
    EmptyWindowWarning,
    MainTermReport,
    brun_titchmarsh_check,
    closed_form_constant,
    discrepancy_scan,
    dl_summatory,
    ds_summatory,
    inner_exact,
    inner_sum_collapsed,
    inner_sum_naive,
    main_term_exact,
    main_term_report,
    main_term_sum,
    smooth_count,
    smooth_count_check,
)
from splitprimes.arith import euler_phi, factorize, sieve_primes, small_primes
from splitprimes.torsion import SieveConfig, dl_set, ds_set, dx_count


def naive_main_term(X, theta):
    """Double loop straight from the definition, exact until the final log."""
    t = Fraction(theta)
    total = Fraction(0)
    d = 1
    while True:
        m = d * d
        # X^t < m <= 2 X^t  <=>  m^den > X^num and m^den <= 2^den X^num
        if m**t.denominator > 2**t.denominator * X**t.numerator:
            break
        if m**t.denominator > X**t.numerator:
            phi = sum(1 for k in range(1, m + 1) if math.gcd(k, m) == 1)
            for a in range(-3 * math.isqrt(X), 3 * math.isqrt(X) + 1):
                if a * a < 8 * X and (a - 2) % d == 0:
                    total += (2 * X - Fraction(a * a, 4)) / phi
        d += 1
    return float(total) / math.log(X)


def test_main_term_regression():
    X, theta = 10**4, Fraction(55, 100)
    v = main_term_sum(X, theta)
    assert v == pytest.approx(naive_main_term(X, theta), rel=1e-12)
    # frozen from the naive oracle above
    assert v == pytest.approx(2131.99683608662, rel=1e-12)


def test_collapsed_matches_naive_random():
    rng = random.Random(11)
    for _ in range(100):
        X = rng.randrange(1000, 10**7)
        d = rng.randrange(1, 3000)
        a, b = inner_sum_collapsed(d, X), inner_sum_naive(d, X)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_inner_sum_single_trace():
    # once d > 2 sqrt(8X) + 2 only a = 2 survives
    X, d = 1000, 200
    assert inner_exact(d, X) == Fraction(2 * X - 1, euler_phi(d * d))


def test_main_term_linear_in_levels():
    X = 10**6
    lo = 10  # split d in (lo, 2lo] and (2lo, 4lo]
    first = range(lo + 1, 2 * lo + 1)
    second = range(2 * lo + 1, 4 * lo + 1)
    union = range(lo + 1, 4 * lo + 1)
    assert main_term_exact(X, union) == main_term_exact(X, first) + main_term_exact(X, second)


def test_main_term_empty_window_warns(monkeypatch):
    # (Y, 2Y] always holds a square for X >= 1000, so force the empty case
    import splitprimes.analytic as mod

    monkeypatch.setattr(mod, "_levels", lambda X, theta: range(0))
    with pytest.warns(EmptyWindowWarning):
        assert main_term_sum(10**4, Fraction(51, 100)) == 0.0
    assert main_term_report(10**4, Fraction(51, 100)).empty


def test_closed_form_constant():
    assert closed_form_constant() == pytest.approx(1575 * 1.2020569031595942 * math.sqrt(2) / (4 * math.pi**4), rel=1e-13)
    assert closed_form_constant() == pytest.approx(6.871654, abs=1e-5)


def test_main_term_report_roundtrip():
    r = main_term_report(10**5, Fraction(51, 100))
    assert MainTermReport.from_json(r.to_json()) == r


def test_ds_summatory_small():
    # 100: brute force with the divisor criterion
    ref = sum(len(ds_set(p)) for p in small_primes(100).tolist())
    assert ds_summatory(100)[0] == ref


@pytest.mark.parametrize("X", [1000, 5000, 10_000])
def test_ds_summatory_brute(X):
    ref = sum(sum(1 for d in range(1, p) if (p - 1) % d == 0 and d**4 <= 16 * p) for p in small_primes(X).tolist())
    assert ds_summatory(X)[0] == ref


def test_ds_level_one_is_pi():
    # d = 1 contributes every prime; removing it leaves levels d >= 2
    X = 50_000
    total = ds_summatory(X)[0]
    rest = sum(len(ds_set(p)) - 1 for p in small_primes(X).tolist())
    assert total - rest == len(small_primes(X))


@pytest.mark.parametrize("X", [1000, 7919])
def test_dl_summatory_brute(X):
    ref = sum(len(dl_set(p)) for p in small_primes(X).tolist() if p >= 5)
    value, main = dl_summatory(X)
    assert value == ref
    assert main > 0


def test_dx_identity_small():
    X = 10**4
    cfg = SieveConfig(Fraction(55, 100))
    rows, summary = discrepancy_scan(X, cfg)
    per_prime = sum(dx_count(p, X, cfg) for p in sieve_primes(X + 1, 2 * X + 1).primes.tolist())
    assert summary.observed_total == per_prime


def test_discrepancy_example():
    rows, s = discrepancy_scan(10**6, SieveConfig(Fraction(51, 100)))
    assert s.n_levels == len(rows) > 0
    assert math.isfinite(s.median_relative_error)
    assert s.fraction_over["1.0"] < 0.5
    assert DiscrepancySummary.from_json(s.to_json()) == s
    assert DiscrepancyRow.from_json(rows[0].to_json()) == rows[0]


def test_sparse_rows_are_recorded():
    rows, _ = discrepancy_scan(10**4, SieveConfig(Fraction(9, 10)))
    sparse = [r for r in rows if r.expected < 1 and r.observed == 0]
    for r in sparse:
        assert r.relative_error == pytest.approx(1.0)


def test_deta_family_flag():
    _, s = discrepancy_scan(10**6, SieveConfig(Fraction(51, 100)), family="deta")
    assert s.empty == (s.n_levels == 0)
    with pytest.raises(ValueError):
        discrepancy_scan(10**4, SieveConfig(0.51), family="bogus")


def test_brun_titchmarsh_examples():
    assert brun_titchmarsh_check(10**6, 101, 1)
    assert brun_titchmarsh_check(10**4, 3, 2)
    with pytest.raises(ValueError):
        brun_titchmarsh_check(10**4, 6, 3)


def _largest_factor(n):
    return max(q for q, _ in factorize(n).factors)


@pytest.mark.parametrize("Y,Z", [(1000, 7), (5000, 30), (2000, 2000)])
def test_smooth_count_brute(Y, Z):
    assert smooth_count(Y, Z) == sum(1 for n in range(Y + 1, 2 * Y + 1) if _largest_factor(n) < Z)


def test_smooth_count_no_small_primes():
    assert smooth_count(100, 2) == 0


def test_smooth_count_examples():
    assert smooth_count_check(10**5, 10)
    assert smooth_count_check(10**4, 10**4)
    assert smooth_count_check(10**6, 50)
