"""Reeb vectors of toric Calabi-Yau cones: volume minimization and rational approximation.

Reeb vectors are written ``(3, a, b)`` in the height-one basis of a Gorenstein
cone; they range over three times the open polygon.  The objective is
``6 * vol{y in dual cone : <y, xi> <= 1}``, homogeneous of degree -3.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

import mpmath

from .errors import (
    NonConvergence,
    NotGorenstein,
    PrecisionExhausted,
    ReebOutsidePolygon,
    TargetRational,
)
from .lattice import Vector, dual_cone
from .toric import GoodCone, LatticePolygon

DEFAULT_DPS = 60
RATIONAL_SNAP_DEN = 10 ** 4
MAX_DENOMINATOR = 10 ** 6


@dataclass(frozen=True)
class ReebPolygon:
    """Open polygon of admissible ``(x, y)`` with ``xi = (3, x, y)``.

    Each inequality ``(alpha, beta, gamma)`` reads ``alpha*x + beta*y + gamma > 0``.
    """

    polygon: LatticePolygon
    inequalities: tuple[tuple[int, int, int], ...]

    def contains(self, x, y) -> bool:
        return all(al * x + be * y + ga > 0 for al, be, ga in self.inequalities)

    def vertices(self) -> list[tuple[int, int]]:
        return [(3 * v[0], 3 * v[1]) for v in self.polygon.vertices]


def _polygon_of(c: GoodCone) -> LatticePolygon:
    if not isinstance(c, GoodCone) or c.polygon is None:
        raise NotGorenstein("the cone has no height-one polygon")
    return c.polygon


def reeb_polygon(c: GoodCone) -> ReebPolygon:
    poly = _polygon_of(c)
    ineqs = []
    for (x0, y0), (x1, y1) in poly.edges():
        # orient((x0,y0),(x1,y1),(x/3,y/3)) > 0, scaled by 3
        dx, dy = x1 - x0, y1 - y0
        ineqs.append((-dy, dx, 3 * (dy * x0 - dx * y0)))
    return ReebPolygon(poly, tuple(ineqs))


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _volume_raw(dual_rays: Sequence[Vector], xi: Sequence):
    q = []
    for u in dual_rays:
        s = u[0] * xi[0] + u[1] * xi[1] + u[2] * xi[2]
        if s <= 0:
            raise ReebOutsidePolygon(f"xi = {tuple(xi)} pairs non-positively with a dual ray")
        q.append([x / s for x in u])
    total = 0
    for j in range(1, len(q) - 1):
        total += abs(_det3(q[0], q[j], q[j + 1]))
    return total


def volume(c: GoodCone, xi: Sequence) -> object:
    """``6 * vol`` of the truncated dual cone; exact Fraction for rational ``xi``.

    ``xi`` may be any vector in the interior of the cone (not only at
    height 3); entries may be ints, Fractions or mpmath reals.
    """
    if len(xi) != 3:
        raise ValueError("xi must have three coordinates")
    xi = tuple(Fraction(x) if isinstance(x, (int, Fraction)) else x for x in xi)
    if not c.base.interior_contains(xi):
        raise ReebOutsidePolygon(f"xi = {xi} is not interior to the cone")
    return _volume_raw(dual_cone(c.base).rays, xi)


@dataclass(frozen=True)
class ReebMinimum:
    xi: tuple  # (3, a, b) as mpmath reals
    gradient_norm: object
    value: object
    iterations: int


def _fd_grad(f, x, h):
    a, b = x
    ga = (f((a + h, b)) - f((a - h, b))) / (2 * h)
    gb = (f((a, b + h)) - f((a, b - h))) / (2 * h)
    return ga, gb


def _fd_hess(f, x, h):
    a, b = x
    f0 = f((a, b))
    haa = (f((a + h, b)) - 2 * f0 + f((a - h, b))) / h ** 2
    hbb = (f((a, b + h)) - 2 * f0 + f((a, b - h))) / h ** 2
    hab = (f((a + h, b + h)) - f((a + h, b - h)) - f((a - h, b + h)) + f((a - h, b - h))) / (4 * h ** 2)
    return haa, hab, hbb


def minimize_volume(c: GoodCone, tol: float = 1e-10, max_iter: int = 500,
                    dps: int = DEFAULT_DPS) -> ReebMinimum:
    """Damped Newton on the slice ``xi = (3, a, b)`` from the polygon's vertex barycenter.

    Derivatives are central finite differences at working precision ``dps``.
    Iterates until the Newton step falls below ``10**(-dps/2)``; the gradient
    norm reported at the end must be at most ``tol``.
    """
    poly = _polygon_of(c)
    rays = dual_cone(c.base).rays
    with mpmath.workdps(dps):
        three = mpmath.mpf(3)

        def f(p):
            return _volume_raw(rays, (three, p[0], p[1]))

        region = reeb_polygon(c)
        n = len(poly.vertices)
        x = (mpmath.mpf(3 * sum(v[0] for v in poly.vertices)) / n,
             mpmath.mpf(3 * sum(v[1] for v in poly.vertices)) / n)
        hg = mpmath.mpf(10) ** (-(dps // 3))
        hh = mpmath.mpf(10) ** (-(dps // 5))
        step_tol = mpmath.mpf(10) ** (-(dps // 2))
        for it in range(1, max_iter + 1):
            ga, gb = _fd_grad(f, x, hg)
            haa, hab, hbb = _fd_hess(f, x, hh)
            det = haa * hbb - hab * hab
            if haa > 0 and det > 0:
                da = -(hbb * ga - hab * gb) / det
                db = -(-hab * ga + haa * gb) / det
            else:
                da, db = -ga, -gb
            fx = f(x)
            t = mpmath.mpf(1)
            for _ in range(200):
                cand = (x[0] + t * da, x[1] + t * db)
                if region.contains(*cand) and f(cand) <= fx + abs(fx) * mpmath.mpf(10) ** (-(dps - 5)):
                    break
                t /= 2
            else:
                raise NonConvergence("line search failed to stay interior")
            x = cand
            if t * max(abs(da), abs(db)) < step_tol:
                break
        else:
            raise NonConvergence(f"no convergence in {max_iter} iterations")
        ga, gb = _fd_grad(f, x, hg)
        gnorm = mpmath.sqrt(ga ** 2 + gb ** 2)
        if gnorm > tol:
            raise NonConvergence(f"gradient norm {mpmath.nstr(gnorm, 5)} exceeds tol {tol}")
        return ReebMinimum((three, +x[0], +x[1]), +gnorm, +f(x), it)


# ----------------------------------------------------------- approximation

@dataclass(frozen=True)
class DirichletApproximant:
    xi: tuple[int, Fraction, Fraction]
    c: int
    error: object  # max-norm distance to the target

    @property
    def error_bound(self) -> float:
        return float(self.c) ** -1.5

    def satisfies_bound(self) -> bool:
        # error <= c^(-3/2)  <=>  error^2 * c^3 <= 1
        e = self.error
        if isinstance(e, Fraction):
            return e * e * self.c ** 3 <= 1
        with mpmath.workdps(DEFAULT_DPS):
            return mpmath.mpf(e) ** 2 * self.c ** 3 <= 1


def minimal_denominator(xi: Sequence[Fraction]) -> int:
    """Smallest positive integer c with c * xi integral."""
    c = 1
    for x in xi:
        d = Fraction(x).denominator
        c = c * d // gcd(c, d)
    return c


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def snap_rational(x, dps: int = DEFAULT_DPS, max_den: int = RATIONAL_SNAP_DEN) -> Fraction | None:
    """The rational with denominator ``<= max_den`` within ``10**-(dps//2 - 5)`` of ``x``, if any.

    The tolerance matches the accuracy of :func:`minimize_volume` at the same
    precision, so a minimizer that sits on a rational point is recognized.
    """
    if _is_rational(x):
        return Fraction(x)
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        q = Fraction(mpmath.nstr(xm, dps, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)).limit_denominator(max_den)
        if abs(xm - mpmath.mpf(q.numerator) / q.denominator) < mpmath.mpf(10) ** (-(dps // 2 - 5)):
            return q
    return None


def _approximants(a, b, region: ReebPolygon | None, dps: int,
                  max_den: int) -> Iterator[DirichletApproximant]:
    with mpmath.workdps(dps):
        am, bm = mpmath.mpf(a), mpmath.mpf(b)
        floor_eps = mpmath.mpf(10) ** (-(dps - 10))
        c = 0
        while True:
            c += 1
            if c > max_den:
                raise PrecisionExhausted(f"no further approximant with denominator <= {max_den}")
            bound = mpmath.mpf(c) ** mpmath.mpf(-1.5)
            if bound < floor_eps:
                raise PrecisionExhausted(f"denominator {c} needs more than {dps} digits")
            ra = range(int(mpmath.ceil((am - bound) * c)), int(mpmath.floor((am + bound) * c)) + 1)
            rb = range(int(mpmath.ceil((bm - bound) * c)), int(mpmath.floor((bm + bound) * c)) + 1)
            for pa in ra:
                for pb in rb:
                    fa, fb = Fraction(pa, c), Fraction(pb, c)
                    if minimal_denominator((fa, fb)) != c:
                        continue
                    if region is not None and not region.contains(fa, fb):
                        continue
                    err = max(abs(mpmath.mpf(pa) / c - am), abs(mpmath.mpf(pb) / c - bm))
                    if abs(err - bound) < floor_eps:
                        raise PrecisionExhausted("error too close to the bound to decide")
                    if err <= bound:
                        yield DirichletApproximant((3, fa, fb), c, +err)
                        break
                else:
                    continue
                break


def dirichlet_approximants(xi: Sequence, count: int, cone: GoodCone | None = None,
                           dps: int = DEFAULT_DPS, max_den: int = MAX_DENOMINATOR) -> list[DirichletApproximant]:
    """First ``count`` rational approximants ``(3, p/c, q/c)`` with error at most ``c**-1.5``.

    Denominators strictly increase; for each ``c`` the lexicographically
    smallest numerator pair wins.  With ``cone`` given, approximants must lie
    in its open Reeb polygon.  A rational target yields only itself, after
    which :class:`TargetRational` is raised (its ``partial`` attribute holds
    that single approximant).  A numerical target within ``10**-(dps//2 - 5)`` of
    a rational with denominator at most 10^4 is treated as that rational.
    Denominators beyond ``max_den`` raise PrecisionExhausted.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if xi[0] != 3:
        raise ValueError("Reeb vectors are normalized to first coordinate 3")
    region = reeb_polygon(cone) if cone is not None else None
    a, b = xi[1], xi[2]
    if region is not None and not region.contains(a, b):
        raise ReebOutsidePolygon(f"xi = {tuple(xi)} is outside the Reeb polygon")
    sa, sb = snap_rational(a, dps), snap_rational(b, dps)
    if sa is not None and sb is not None:
        fa, fb = sa, sb
        only = DirichletApproximant((3, fa, fb), minimal_denominator((fa, fb)), Fraction(0))
        if count == 1:
            return [only]
        err = TargetRational("target is rational; it is its own only approximant")
        err.partial = [only]
        raise err
    out = []
    for ap in _approximants(a, b, region, dps, max_den):
        out.append(ap)
        if len(out) == count:
            break
    return out
