"""Adaptive cubature over unions of convex polytopes in dimension 1 to 3.

A region is cut into convex pieces by slicing along linear forms, each
piece is triangulated, and simplices are refined by longest-edge
bisection until the summed error estimate drops below the tolerance.
The integrand is assumed smooth on each piece; callers put every kink
of the integrand on a cut.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import Delaunay, HalfspaceIntersection

Integrand = Callable[[np.ndarray], np.ndarray]  # (n, k) points -> (n,) values

MIN_RADIUS = 1e-12
MAX_CELLS = 200_000


class QuadratureError(RuntimeError):
    def __init__(self, msg: str, worst_cell: np.ndarray | None = None, error: float | None = None):
        super().__init__(msg)
        self.worst_cell = worst_cell
        self.error = error


# -- convex decomposition -----------------------------------------------------


@dataclass
class Polytope:
    """{x : A x <= b} with a nonempty interior."""

    A: np.ndarray
    b: np.ndarray
    center: np.ndarray
    radius: float

    def vertices(self) -> np.ndarray:
        k = self.A.shape[1]
        if k == 1:
            a, b = self.A[:, 0], self.b
            lo = max((bi / ai for ai, bi in zip(a, b) if ai < 0), default=-math.inf)
            hi = min((bi / ai for ai, bi in zip(a, b) if ai > 0), default=math.inf)
            return np.array([[lo], [hi]])
        hs = HalfspaceIntersection(np.hstack([self.A, -self.b[:, None]]), self.center)
        v = hs.intersections
        return np.unique(np.round(v, 14), axis=0)


def chebyshev(A: np.ndarray, b: np.ndarray) -> Polytope | None:
    """The largest inscribed ball of {A x <= b}, or None if it is degenerate."""
    k = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.hstack([A, norms[:, None]]),
        b_ub=b,
        bounds=[(None, None)] * k + [(0, None)],
        method="highs",
    )
    if res.status != 0 or -res.fun <= MIN_RADIUS:
        return None
    return Polytope(A, b, res.x[:k], -res.fun)


def split_by_form(pieces: list[Polytope], form: np.ndarray, cuts: Sequence[float]) -> list[Polytope]:
    """Cut every piece along form . x = t for each t in ``cuts``."""
    edges = [-math.inf, *sorted(cuts), math.inf]
    out = []
    for P in pieces:
        for lo, hi in zip(edges, edges[1:]):
            A, b = [P.A], [P.b]
            if lo > -math.inf:
                A.append(-form[None, :])
                b.append(np.array([-lo]))
            if hi < math.inf:
                A.append(form[None, :])
                b.append(np.array([hi]))
            Q = chebyshev(np.vstack(A), np.concatenate(b))
            if Q is not None:
                out.append(Q)
    return out


def restrict(pieces: list[Polytope], form: np.ndarray, allowed: Sequence[tuple[float, float]]) -> list[Polytope]:
    """Keep only the parts of each piece where form . x lies in an allowed interval."""
    out = []
    for P in pieces:
        for lo, hi in allowed:
            A, b = [P.A], [P.b]
            if lo > -math.inf:
                A.append(-form[None, :])
                b.append(np.array([-lo]))
            if hi < math.inf:
                A.append(form[None, :])
                b.append(np.array([hi]))
            Q = chebyshev(np.vstack(A), np.concatenate(b))
            if Q is not None:
                out.append(Q)
    return out


def triangulate(P: Polytope) -> list[np.ndarray]:
    v = P.vertices()
    if v.shape[1] == 1:
        return [v]
    tri = Delaunay(v)
    out = []
    for s in tri.simplices:
        S = v[s]
        if abs(np.linalg.det(S[1:] - S[0])) > 1e-18:
            out.append(S)
    return out


# -- simplex rules ------------------------------------------------------------


@lru_cache(maxsize=16)
def simplex_rule(k: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Legendre rule on the unit k-simplex.

    Returns barycentric coordinates (m, k+1) and weights summing to 1/k!.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    x = (x + 1) / 2
    w = w / 2
    grids = np.meshgrid(*([x] * k), indexing="ij")
    wgrids = np.meshgrid(*([w] * k), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    # x = v0 + u1 (v1 - v0) + u1 u2 (v2 - v1) + ...
    cum = np.cumprod(u, axis=1)
    bary = np.zeros((u.shape[0], k + 1))
    bary[:, 0] = 1 - cum[:, 0]
    for i in range(1, k):
        bary[:, i] = cum[:, i - 1] - cum[:, i]
    bary[:, k] = cum[:, k - 1]
    jac = np.ones(u.shape[0])
    for i in range(k - 1):
        jac *= u[:, i] ** (k - 1 - i)
    return bary, wt * jac


def _simplex_estimate(f: Integrand, S: np.ndarray, lo: int, hi: int) -> tuple[float, float]:
    k = S.shape[1]
    vol = float(abs(np.linalg.det(S[1:] - S[0])) if k > 1 else abs(S[1, 0] - S[0, 0]))
    vals = []
    for n in (lo, hi):
        bary, w = simplex_rule(k, n)
        pts = bary @ S
        vals.append(vol * float(np.dot(w, f(pts))))
    return vals[1], abs(vals[1] - vals[0])


def _bisect(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = S.shape[0]
    best, bi, bj = -1.0, 0, 1
    for i in range(m):
        for j in range(i + 1, m):
            L = float(np.sum((S[i] - S[j]) ** 2))
            if L > best:
                best, bi, bj = L, i, j
    mid = (S[bi] + S[bj]) / 2
    A, B = S.copy(), S.copy()
    A[bi] = mid
    B[bj] = mid
    return A, B


@dataclass
class CubatureResult:
    value: float
    error: float
    cells: int
    history: list[tuple[float, float]]


def integrate_simplices(
    f: Integrand,
    simplices: Sequence[np.ndarray],
    tol: float,
    orders: tuple[int, int] = (5, 8),
    max_cells: int = MAX_CELLS,
) -> CubatureResult:
    """Refine the worst simplex until the summed error is at most ``tol``."""
    heap: list[tuple[float, int, np.ndarray, float]] = []
    counter = 0
    for S in simplices:
        v, e = _simplex_estimate(f, S, *orders)
        heap.append((-e, counter, S, v))
        counter += 1
    heapq.heapify(heap)
    value = math.fsum(h[3] for h in heap)
    error = math.fsum(-h[0] for h in heap)
    history = [(value, error)]
    steps = 0
    while heap and error > tol:
        if len(heap) >= max_cells:
            neg, _, S, _ = heap[0]
            raise QuadratureError(f"no convergence after {len(heap)} cells (error {error:.3g})", S, -neg)
        neg, _, S, v = heapq.heappop(heap)
        value -= v
        error += neg
        for child in _bisect(S):
            cv, ce = _simplex_estimate(f, child, *orders)
            heapq.heappush(heap, (-ce, counter, child, cv))
            counter += 1
            value += cv
            error += ce
        steps += 1
        if steps % 256 == 0:
            # resum so the running totals do not drift
            value = math.fsum(h[3] for h in heap)
            error = math.fsum(-h[0] for h in heap)
        history.append((value, error))
    cells = sorted(heap, key=lambda h: h[1])
    value = math.fsum(h[3] for h in cells)
    error = math.fsum(-h[0] for h in cells)
    return CubatureResult(value, error, len(cells), history)
