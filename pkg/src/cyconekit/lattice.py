"""Exact integer/rational linear algebra and 3-dimensional rational cones.

Matrices are plain lists of lists of Python ints (arbitrary precision).
Nothing here ever touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from math import gcd
from typing import Sequence

from .errors import DegenerateCone, NotStronglyConvex, UnboundedComputation

IntMatrix = list[list[int]]
Vector = tuple[int, ...]


# ---------------------------------------------------------------- matrices

def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)]


def det(m: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(m: Sequence[Sequence]) -> int:
    rows = [[Fraction(x) for x in r] for r in m]
    if not rows:
        return 0
    r, ncols = 0, len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def solve_rational(a: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """Solve a x = b exactly over Q.

    Returns the unique solution, or None if the system is inconsistent or
    underdetermined.
    """
    n = len(a[0])
    rows = [[Fraction(x) for x in r] + [Fraction(y)] for r, y in zip(a, b)]
    r = 0
    pivots = []
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] != 0 for row in rows[r:]) or len(pivots) < n:
        return None
    return tuple(rows[i][-1] for i in range(n))


def inverse_rational(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    cols = [solve_rational(m, [int(i == j) for i in range(n)]) for j in range(n)]
    if any(c is None for c in cols):
        raise ZeroDivisionError("singular matrix")
    return transpose(cols)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def hnf(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form.

    Returns ``(h, u)`` with ``u`` unimodular and ``u @ m == h``.  Pivots of
    ``h`` are positive, entries below a pivot vanish and entries above a
    pivot lie in ``[0, pivot)``.
    """
    h = [list(r) for r in m]
    nrows, ncols = len(h), len(h[0])
    if all(x == 0 for r in h for x in r):
        raise ValueError("hnf of the zero matrix")
    u = identity(nrows)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        for i in range(r + 1, nrows):
            if h[i][c] == 0:
                continue
            g, x, y = _xgcd(h[r][c], h[i][c])
            a, b = h[r][c] // g, h[i][c] // g
            # [[x, y], [-b, a]] has determinant 1
            h[r], h[i] = (
                [x * p + y * q for p, q in zip(h[r], h[i])],
                [-b * p + a * q for p, q in zip(h[r], h[i])],
            )
            u[r], u[i] = (
                [x * p + y * q for p, q in zip(u[r], u[i])],
                [-b * p + a * q for p, q in zip(u[r], u[i])],
            )
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        p = h[r][c]
        for i in range(r):
            q = h[i][c] // p
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        r += 1
    return h, u


def snf(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form ``(s, u, v)`` with ``u @ m @ v == s``.

    ``u`` and ``v`` are unimodular, ``s`` is diagonal with nonnegative
    entries each dividing the next.
    """
    s = [list(r) for r in m]
    nr, nc = len(s), len(s[0])
    if all(x == 0 for r in s for x in r):
        raise ValueError("snf of the zero matrix")
    u, v = identity(nr), identity(nc)

    def row_op(i, j, a, b, c, d):
        # rows (i, j) <- ([[a, b], [c, d]]) (rows i, j); determinant +-1
        for mat in (s, u):
            ri, rj = mat[i], mat[j]
            mat[i] = [a * x + b * y for x, y in zip(ri, rj)]
            mat[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def col_op(i, j, a, b, c, d):
        for mat in (s, v):
            for row in mat:
                x, y = row[i], row[j]
                row[i] = a * x + b * y
                row[j] = c * x + d * y

    t = 0
    while t < min(nr, nc):
        nz = [(abs(s[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if s[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        if pi != t:
            row_op(t, pi, 0, 1, 1, 0)
        if pj != t:
            col_op(t, pj, 0, 1, 1, 0)
        done = False
        while not done:
            done = True
            for i in range(t + 1, nr):
                if s[i][t]:
                    if s[i][t] % s[t][t] == 0:
                        row_op(t, i, 1, 0, -(s[i][t] // s[t][t]), 1)
                        continue
                    g, x, y = _xgcd(s[t][t], s[i][t])
                    a, b = s[t][t] // g, s[i][t] // g
                    row_op(t, i, x, y, -b, a)
            for j in range(t + 1, nc):
                if s[t][j]:
                    if s[t][j] % s[t][t] == 0:
                        col_op(t, j, 1, 0, -(s[t][j] // s[t][t]), 1)
                        continue
                    g, x, y = _xgcd(s[t][t], s[t][j])
                    a, b = s[t][t] // g, s[t][j] // g
                    col_op(t, j, x, y, -b, a)
                    done = False
            if any(s[i][t] for i in range(t + 1, nr)):
                done = False
                continue
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                        if s[i][j] % s[t][t]), None)
            if bad is not None:
                # fold the offending row into row t and start over
                row_op(t, bad[0], 1, 1, 0, 1)
                done = False
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return s, u, v


def invariant_factors(m: Sequence[Sequence[int]]) -> list[int]:
    s, _, _ = snf(m)
    return [s[i][i] for i in range(min(len(s), len(s[0]))) if s[i][i]]


# ----------------------------------------------------------------- vectors

def primitive(v: Sequence[int]) -> Vector:
    g = reduce(gcd, v, 0)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(x // g for x in v)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def cross(a: Sequence, b: Sequence) -> tuple:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def complete_to_basis(m: Sequence[int]) -> IntMatrix:
    """Unimodular matrix whose first row is the primitive vector ``m``."""
    if reduce(gcd, m, 0) != 1:
        raise ValueError("vector is not primitive")
    n = len(m)
    if list(m) == [int(i == 0) for i in range(n)]:
        return identity(n)
    col = [[x] for x in m]
    _, u = hnf(col)
    # u @ m = e1, so m is the first column of u^-1; return (u^-1)^T
    inv = inverse_rational(u)
    out = transpose([[int(x) for x in r] for r in inv])
    assert out[0] == list(m)
    return out


# ------------------------------------------------------------------- cones

def _cyclic_order(vectors: Sequence[Vector], axis: Sequence[int]) -> list[Vector]:
    """Sort vectors around ``axis`` counterclockwise (exact comparison)."""
    ref = vectors[0]

    def less(u, v):
        # angle(u) < angle(v) measured from ref about axis
        su = dot(cross(ref, u), axis)
        sv = dot(cross(ref, v), axis)
        hu = 0 if su > 0 or (su == 0 and _same_side(ref, u, axis)) else 1
        hv = 0 if sv > 0 or (sv == 0 and _same_side(ref, v, axis)) else 1
        if hu != hv:
            return hu < hv
        return dot(cross(u, v), axis) > 0

    from functools import cmp_to_key

    def cmp(u, v):
        if u == v:
            return 0
        return -1 if less(u, v) else 1

    return sorted(vectors, key=cmp_to_key(cmp))


def _same_side(ref, v, axis) -> bool:
    # v collinear with ref in projection; True when pointing the same way
    pr = cross(axis, ref)
    pv = cross(axis, v)
    return dot(pr, pv) > 0


@dataclass(frozen=True)
class RationalCone:
    """Full-dimensional strongly convex cone in Z^3 given by its rays.

    Rays are normalized to primitive vectors and kept in input order;
    ``facets`` holds inward primitive facet normals.
    """

    rays: tuple[Vector, ...]
    facets: tuple[Vector, ...] = field(default=(), compare=False)

    def __post_init__(self):
        rays = tuple(primitive(r) for r in self.rays)
        if any(len(r) != 3 for r in rays):
            raise DegenerateCone("only 3-dimensional cones are supported")
        if len(set(rays)) != len(rays):
            raise DegenerateCone("duplicate ray generators")
        object.__setattr__(self, "rays", rays)
        if rank(rays) < 3:
            raise DegenerateCone("rays do not span R^3")
        facets = _facets(rays)
        if rank(facets) < 3 if facets else True:
            raise NotStronglyConvex("cone contains a line")
        for r in rays:
            tight = [f for f in facets if dot(f, r) == 0]
            if rank(tight) < 2:
                raise DegenerateCone(f"ray {r} is not extremal")
        object.__setattr__(self, "facets", facets)

    @property
    def dim(self) -> int:
        return 3

    def contains(self, p: Sequence) -> bool:
        return all(dot(f, p) >= 0 for f in self.facets)

    def interior_contains(self, p: Sequence) -> bool:
        return all(dot(f, p) > 0 for f in self.facets)

    def interior_vector(self) -> Vector:
        return tuple(sum(r[i] for r in self.rays) for i in range(3))

    def cyclic_rays(self) -> list[Vector]:
        """Rays in counterclockwise order seen from inside the cone."""
        return _cyclic_order(list(self.rays), self.interior_vector())

    def faces2(self) -> list[tuple[Vector, Vector]]:
        """Two-dimensional faces as pairs of adjacent rays."""
        out = []
        for f in self.facets:
            tight = [r for r in self.rays if dot(f, r) == 0]
            out.append(tuple(tight))
        return out

    def transform(self, g: Sequence[Sequence[int]]) -> "RationalCone":
        return RationalCone(tuple(matvec(g, r) for r in self.rays))


def _facets(rays: Sequence[Vector]) -> tuple[Vector, ...]:
    found: list[Vector] = []
    for a, b in combinations(rays, 2):
        n = cross(a, b)
        if n == (0, 0, 0):
            continue
        n = primitive(n)
        vals = [dot(n, r) for r in rays]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            n = tuple(-x for x in n)
        else:
            continue
        if n not in found:
            found.append(n)
    return tuple(found)


def dual_cone(c: RationalCone) -> RationalCone:
    """Cone whose rays are the inward facet normals of ``c``."""
    order = _cyclic_order(list(c.facets), c.interior_vector())
    return RationalCone(tuple(order))


def _parallelepiped_points(gens: Sequence[Vector]) -> list[Vector]:
    """Lattice points of the half-open parallelepiped spanned by three gens."""
    v = transpose(gens)  # generators as columns
    s, u, _ = snf(v)
    d = [s[i][i] for i in range(3)]
    uinv = inverse_rational(u)
    vinv = inverse_rational(v)
    pts = []
    for q in product(*(range(x) for x in d)):
        p0 = matvec(uinv, q)
        t = matvec(vinv, p0)
        frac = [x - (x.numerator // x.denominator) for x in t]
        p = matvec(v, frac)
        pts.append(tuple(int(x) for x in p))
    return pts


def hilbert_basis(c: RationalCone, degree_cap: int = 64) -> list[Vector]:
    """Minimal generating set of the monoid ``c ∩ Z^3``.

    Each candidate's pairing with a fixed interior functional of the dual
    cone must stay below ``degree_cap``.
    """
    rays = c.cyclic_rays()
    functional = tuple(sum(f[i] for f in c.facets) for i in range(3))
    cand: set[Vector] = set(rays)
    for i in range(1, len(rays) - 1):
        for p in _parallelepiped_points([rays[0], rays[i], rays[i + 1]]):
            if any(p):
                cand.add(p)
    if any(dot(functional, p) > degree_cap for p in cand):
        raise UnboundedComputation(
            f"Hilbert basis candidates exceed degree cap {degree_cap}")
    basis = []
    for x in cand:
        reducible = any(
            g != x and c.contains(tuple(a - b for a, b in zip(x, g)))
            for g in cand
        )
        if not reducible:
            basis.append(x)
    return sorted(basis, key=lambda p: (dot(functional, p), p))


def in_monoid_span(p: Sequence[int], gens: Sequence[Vector], cone: RationalCone) -> bool:
    """Bounded search: is ``p`` a nonnegative integer combination of gens?

    All generators must lie in ``cone``; the search prunes as soon as the
    remainder leaves the cone, so it terminates for pointed cones.
    """
    memo: dict[tuple, bool] = {}
    functional = tuple(sum(f[i] for f in cone.facets) for i in range(3))
    gens = sorted(gens, key=lambda g: dot(functional, g))

    def rec(q: tuple, start: int) -> bool:
        if not any(q):
            return True
        if not cone.contains(q):
            return False
        key = (q, start)
        if key in memo:
            return memo[key]
        ok = False
        for i in range(start, len(gens)):
            g = gens[i]
            if rec(tuple(a - b for a, b in zip(q, g)), i):
                ok = True
                break
        memo[key] = ok
        return ok

    return rec(tuple(p), 0)
