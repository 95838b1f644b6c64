"""The Buchstab function and Buchstab integrals over exponent regions.

omega(u) is 1/u on [1, 2] and satisfies (u omega(u))' = omega(u - 1)
beyond; it tends to exp(-gamma).  Integrals of the form

    int omega((1 - a_1 - ... - a_k) / a_k) da_1 ... da_k / (a_1 ... a_{k-1} a_k^2)

over polyhedral regions in exponent space measure how much a sieve loses
when it discards the sums whose exponents fall in the region.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .arith import as_fraction, iter_prime_segments, sieve_primes, zeta_constants
from .quadrature import Polytope, chebyshev, integrate_simplices, restrict, split_by_form, triangulate

DEFAULT_STEP = 1e-4
DEFAULT_UMAX = 30.0
DEFAULT_TOL = 1e-4
DEFAULT_ETA = Fraction(1, 10_000)
# omega is smooth between integers; the majorant also jumps only there
KINKS = (1, 2, 3, 4)
UPPER_TABLE = ((3, 4, 0.5644), (4, math.inf, 0.5617))


# -- omega ----------------------------------------------------------------------


@dataclass(frozen=True)
class BuchstabGrid:
    h: float
    u: np.ndarray
    values: np.ndarray
    error_bound: np.ndarray

    @property
    def u_max(self) -> float:
        return float(self.u[-1])

    def __call__(self, u):
        return np.interp(u, self.u, self.values)


def _integrate_steps(h: float, u_max: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(1 / h))
    if abs(n * h - 1) > 1e-12:
        raise ValueError("1/h must be an integer")
    units = int(math.ceil(u_max - 1))
    u = 1 + np.arange(units * n + 1) / n
    w = np.empty_like(u)
    w[: n + 1] = 1 / u[: n + 1]
    for j in range(1, units):
        # u w(u) on [j+1, j+2] from the trapezoid rule on w over [j, j+1]
        prev = w[(j - 1) * n : j * n + 1]
        F0 = u[j * n] * w[j * n]
        steps = h * (prev[1:] + prev[:-1]) / 2
        F = F0 + np.concatenate([[0.0], np.cumsum(steps)])
        w[j * n : (j + 1) * n + 1] = F / u[j * n : (j + 1) * n + 1]
    return u, w


@lru_cache(maxsize=4)
def buchstab_grid(h: float = DEFAULT_STEP, u_max: float = DEFAULT_UMAX) -> BuchstabGrid:
    """omega tabulated by the method of steps, with a step-doubling error estimate."""
    u, w = _integrate_steps(h, u_max)
    _, w2 = _integrate_steps(2 * h, u_max)
    err = np.zeros_like(w)
    err[::2] = np.abs(w[::2] - w2)
    # odd nodes inherit the larger neighbouring estimate
    err[1:-1:2] = np.maximum(err[:-2:2], err[2::2])
    return BuchstabGrid(h, u, w, err)


def omega(u: float) -> float:
    if u < 1:
        raise ValueError("omega is defined for u >= 1")
    if u < 2:
        return 1 / u
    if u < 3:
        return (1 + math.log(u - 1)) / u
    g = buchstab_grid()
    if u <= g.u_max:
        return float(g(u))
    return zeta_constants().exp_neg_gamma


def omega_array(u: np.ndarray) -> np.ndarray:
    """omega extended by 0 below 1, vectorized."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    g = buchstab_grid()
    a = (u >= 1) & (u < 2)
    out[a] = 1 / u[a]
    b = (u >= 2) & (u < 3)
    out[b] = (1 + np.log(u[b] - 1)) / u[b]
    c = (u >= 3) & (u <= g.u_max)
    out[c] = g(u[c])
    out[u > g.u_max] = zeta_constants().exp_neg_gamma
    return out


def omega_upper(u: float) -> float:
    """The piecewise majorant: 0, 1/u, (1 + log(u-1))/u, 0.5644, 0.5617."""
    if u < 1:
        return 0.0
    if u < 2:
        return 1 / u
    if u < 3:
        return (1 + math.log(u - 1)) / u
    return 0.5644 if u < 4 else 0.5617


def omega_upper_array(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    a = (u >= 1) & (u < 2)
    out[a] = 1 / u[a]
    b = (u >= 2) & (u < 3)
    out[b] = (1 + np.log(u[b] - 1)) / u[b]
    for lo, hi, v in UPPER_TABLE:
        out[(u >= lo) & (u < hi)] = v
    return out


# -- exponent regions -----------------------------------------------------------

_RELS = ("<", "<=", ">", ">=")


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    rhs: Fraction

    def holds(self, x: Sequence[Fraction]) -> bool:
        v = sum(c * xi for c, xi in zip(self.coeffs, x))
        return {"<": v < self.rhs, "<=": v <= self.rhs, ">": v > self.rhs, ">=": v >= self.rhs}[self.rel]


@dataclass(frozen=True)
class Exclusion:
    """coeffs . x must avoid the closed interval [lo, hi]."""

    coeffs: tuple[Fraction, ...]
    lo: Fraction
    hi: Fraction

    def holds(self, x: Sequence[Fraction]) -> bool:
        v = sum(c * xi for c, xi in zip(self.coeffs, x))
        return not self.lo <= v <= self.hi


@dataclass(frozen=True)
class ExponentRegion:
    """A subset of [0, 1]^k cut out by rational linear predicates.

    Text form, one item per line (``#`` starts a comment)::

        dim 2
        0 1 >= 1142/10000
        not 1 1 in 2694/10000 3836/10000
    """

    k: int
    constraints: tuple[Constraint, ...] = ()
    exclusions: tuple[Exclusion, ...] = ()

    def __post_init__(self):
        if not 1 <= self.k <= 3:
            raise ValueError("regions have dimension 1, 2 or 3")
        for c in (*self.constraints, *self.exclusions):
            if len(c.coeffs) != self.k:
                raise ValueError("coefficient count does not match the dimension")

    def contains(self, point) -> bool:
        x = [Fraction(v) for v in point]
        if len(x) != self.k or any(not 0 <= v <= 1 for v in x):
            return False
        return all(c.holds(x) for c in self.constraints) and all(e.holds(x) for e in self.exclusions)

    def to_text(self) -> str:
        lines = [f"dim {self.k}"]
        for c in self.constraints:
            lines.append(" ".join([*map(_fmt, c.coeffs), c.rel, _fmt(c.rhs)]))
        for e in self.exclusions:
            lines.append(" ".join(["not", *map(_fmt, e.coeffs), "in", _fmt(e.lo), _fmt(e.hi)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExponentRegion":
        k = None
        cons, excl = [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if tok[0] == "dim":
                k = int(tok[1])
            elif k is None:
                raise ValueError("the first item must be 'dim k'")
            elif tok[0] == "not":
                if len(tok) != k + 4 or tok[k + 1] != "in":
                    raise ValueError(f"bad exclusion line: {raw!r}")
                excl.append(Exclusion(tuple(map(Fraction, tok[1 : k + 1])), Fraction(tok[k + 2]), Fraction(tok[k + 3])))
            else:
                if len(tok) != k + 2 or tok[k] not in _RELS:
                    raise ValueError(f"bad constraint line: {raw!r}")
                cons.append(Constraint(tuple(map(Fraction, tok[:k])), tok[k], Fraction(tok[k + 1])))
        if k is None:
            raise ValueError("missing 'dim k'")
        return cls(k, tuple(cons), tuple(excl))


def gamma_width(theta, eta) -> Fraction:
    """2 - 7 theta / 2 - eta, the width of the Type II exclusion intervals."""
    theta, eta = as_fraction(theta), as_fraction(eta)
    if theta < Fraction(1, 2):
        raise ValueError("theta must be at least 1/2")
    g = 2 - Fraction(7, 2) * theta - eta
    if g <= 0:
        raise ValueError("empty Type II window")
    return g


def build_region_U(theta, eta=DEFAULT_ETA) -> ExponentRegion:
    """The (alpha, beta) region whose sums the lower-bound sieve discards.

    gamma <= beta <= alpha < 1/2 and alpha + 2 beta < 1, with none of
    alpha, beta, alpha + beta in [theta/2, theta/2 + gamma] or
    [1 - theta/2 - gamma, 1 - theta/2].
    """
    theta, eta = as_fraction(theta), as_fraction(eta)
    g = gamma_width(theta, eta)
    half = Fraction(1, 2)
    cons = (
        Constraint((Fraction(0), Fraction(1)), ">=", g),
        Constraint((Fraction(1), Fraction(-1)), ">=", Fraction(0)),
        Constraint((Fraction(1), Fraction(0)), "<", half),
        Constraint((Fraction(1), Fraction(2)), "<", Fraction(1)),
    )
    excl = []
    for form in ((1, 0), (0, 1), (1, 1)):
        c = tuple(map(Fraction, form))
        excl.append(Exclusion(c, theta / 2, theta / 2 + g))
        excl.append(Exclusion(c, 1 - theta / 2 - g, 1 - theta / 2))
    return ExponentRegion(2, cons, tuple(excl))


# -- integration ----------------------------------------------------------------


def _pieces(region: ExponentRegion) -> list[Polytope]:
    k = region.k
    A = [np.eye(k), -np.eye(k)]
    b = [np.ones(k), np.zeros(k)]
    for c in region.constraints:
        v = np.array([float(x) for x in c.coeffs])
        if c.rel in ("<", "<="):
            A.append(v[None, :])
            b.append(np.array([float(c.rhs)]))
        else:
            A.append(-v[None, :])
            b.append(np.array([-float(c.rhs)]))
    base = chebyshev(np.vstack(A), np.concatenate(b))
    if base is None:
        return []
    pieces = [base]
    by_form: dict[tuple, list[tuple[float, float]]] = {}
    for e in region.exclusions:
        by_form.setdefault(e.coeffs, []).append((float(e.lo), float(e.hi)))
    for coeffs, bad in by_form.items():
        bad.sort()
        allowed, start = [], -math.inf
        for lo, hi in bad:
            if lo > start:
                allowed.append((start, lo))
            start = max(start, hi)
        allowed.append((start, math.inf))
        pieces = restrict(pieces, np.array([float(x) for x in coeffs]), allowed)
    for u in KINKS:
        form = np.ones(k)
        form[-1] = u + 1
        pieces = split_by_form(pieces, form, [1.0])
    return pieces


def _integrand(k: int, method: str):
    w = {"upper_bound": omega_upper_array, "solver": omega_array}[method]

    def f(x: np.ndarray) -> np.ndarray:
        last = x[:, -1]
        u = (1 - x.sum(axis=1)) / last
        dens = last * last
        if k > 1:
            dens = dens * np.prod(x[:, :-1], axis=1)
        return w(u) / dens

    return f


def buchstab_integral(
    region: ExponentRegion,
    method: str = "upper_bound",
    tol: float = DEFAULT_TOL,
    history: list | None = None,
) -> tuple[float, float]:
    """(value, error) of the Buchstab integral over ``region``.

    ``upper_bound`` integrates the piecewise majorant of omega, so the
    value bounds the true integral from above up to the quadrature error.
    ``solver`` uses the tabulated omega.
    """
    if method not in ("upper_bound", "solver"):
        raise ValueError(f"unknown method {method!r}")
    simplices = [S for P in _pieces(region) for S in triangulate(P)]
    if not simplices:
        if history is not None:
            history.append((0.0, 0.0))
        return 0.0, 0.0
    res = integrate_simplices(_integrand(region.k, method), simplices, tol)
    if history is not None:
        history.extend(res.history)
    return res.value, res.error


def deficit(theta, eta=DEFAULT_ETA, tol: float = DEFAULT_TOL) -> float:
    """1 - c0, with c0 the majorant integral over U(theta, eta)."""
    c0, _ = buchstab_integral(build_region_U(theta, eta), "upper_bound", tol)
    return 1 - c0


@dataclass(frozen=True)
class SievePlan:
    theta: Fraction
    eta: Fraction
    gamma: Fraction
    type1_cap: Fraction
    type2_lo: Fraction
    type2_hi: Fraction
    c0: float
    c0_error: float
    deficit: float


def sieve_plan(theta, eta=DEFAULT_ETA, tol: float = DEFAULT_TOL) -> SievePlan:
    """Exponent bookkeeping for the lower-bound sieve at level theta."""
    theta, eta = as_fraction(theta), as_fraction(eta)
    g = gamma_width(theta, eta)
    c0, err = buchstab_integral(build_region_U(theta, eta), "upper_bound", tol)
    return SievePlan(
        theta=theta,
        eta=eta,
        gamma=g,
        type1_cap=Fraction(3, 2) - Fraction(3, 2) * theta - eta,
        type2_lo=theta / 2,
        type2_hi=2 - 3 * theta - eta,
        c0=c0,
        c0_error=err,
        deficit=1 - c0,
    )


# -- rough numbers ----------------------------------------------------------------


def rough_count(Y: int, z: int) -> int:
    """#{n in (Y, 2Y] : n has no prime factor below z}."""
    if Y > 10**8:
        raise ValueError("Y must be at most 10^8")
    if not Y**0.05 < z < Y:
        raise ValueError("need Y^0.05 < z < Y")
    small = sieve_primes(2, z).primes if z > 2 else np.array([], dtype=np.int64)
    total = 0
    seg = 1 << 20
    for lo in range(Y + 1, 2 * Y + 1, seg):
        hi = min(lo + seg, 2 * Y + 1)
        keep = np.ones(hi - lo, dtype=np.bool_)
        for p in small:
            p = int(p)
            keep[(-lo) % p :: p] = False
        total += int(np.count_nonzero(keep))
    return total


def buchstab_empirical(Y: int, z: int) -> float:
    """rough_count(Y, z) divided by omega(log Y / log z) Y / log z."""
    u = math.log(Y) / math.log(z)
    return rough_count(Y, z) / (omega(u) * Y / math.log(z))
