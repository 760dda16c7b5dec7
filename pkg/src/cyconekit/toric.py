"""Toric Calabi-Yau cones in dimension three.

A cone is given by its ray generators in Z^3.  It is *good* when every face
sublattice is spanned by the rays in that face, and *Gorenstein* when a
unimodular change of basis puts all rays at height one; the height-one slice
is then a lattice polygon.  The affine variety is Spec C[dual cone ∩ Z^3],
embedded by the Hilbert basis of the dual cone.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Sequence

from .errors import NotGood, ParseError
from .lattice import (
    IntMatrix,
    RationalCone,
    Vector,
    complete_to_basis,
    dual_cone,
    hilbert_basis,
    invariant_factors,
    matvec,
    primitive,
    rank,
    solve_rational,
)
from .wpoly.groebner import groebner
from .wpoly.poly import Poly

Point = tuple[int, int]


def _orient(a: Sequence, b: Sequence, c: Sequence):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Strict convex hull, counterclockwise, starting at the lowest-leftmost point."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) < 3:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class LatticePolygon:
    """Convex lattice polygon with strictly convex counterclockwise vertices."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        vs = tuple(tuple(int(x) for x in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        if n < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        for i in range(n):
            if _orient(vs[i], vs[(i + 1) % n], vs[(i + 2) % n]) <= 0:
                raise ValueError("vertices are not strictly convex counterclockwise")
        hull = convex_hull(vs)
        k = hull.index(vs[0]) if vs[0] in hull else -1
        if len(hull) != n or k < 0 or tuple(hull[k:] + hull[:k]) != vs:
            raise ValueError("vertex sequence is not the convex hull in order")

    @classmethod
    def from_points(cls, points: Sequence[Point]) -> "LatticePolygon":
        return cls(tuple(convex_hull(points)))

    def edges(self) -> list[tuple[Point, Point]]:
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def contains(self, p: Sequence, strict: bool = False) -> bool:
        for a, b in self.edges():
            o = _orient(a, b, p)
            if o < 0 or (strict and o == 0):
                return False
        return True

    @cached_property
    def lattice_points(self) -> tuple[Point, ...]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return tuple(
            (x, y)
            for x in range(min(xs), max(xs) + 1)
            for y in range(min(ys), max(ys) + 1)
            if self.contains((x, y))
        )

    @cached_property
    def interior_points(self) -> tuple[Point, ...]:
        return tuple(p for p in self.lattice_points if self.contains(p, strict=True))

    @property
    def boundary_points(self) -> tuple[Point, ...]:
        inner = set(self.interior_points)
        return tuple(p for p in self.lattice_points if p not in inner)

    @property
    def area2(self) -> int:
        """Twice the Euclidean area: the number of unimodular triangles in any triangulation."""
        vs = self.vertices
        return sum(_orient(vs[0], vs[i], vs[i + 1]) for i in range(1, len(vs) - 1))

    def translate(self, d: Point) -> "LatticePolygon":
        return LatticePolygon(tuple((v[0] + d[0], v[1] + d[1]) for v in self.vertices))

    def automorphisms(self) -> list[tuple[tuple[tuple[int, int], tuple[int, int]], Point]]:
        """Affine lattice maps ``p -> M p + t`` (``M`` in GL(2, Z)) preserving the polygon.

        Each is fixed by where three consecutive vertices go, so the 2n
        dihedral relabellings of the vertex cycle are the only candidates.
        """
        vs = self.vertices
        n = len(vs)
        a, b, c = vs[0], vs[1], vs[2]
        u = (b[0] - a[0], b[1] - a[1])
        w = (c[0] - a[0], c[1] - a[1])
        det = u[0] * w[1] - u[1] * w[0]
        out = []
        vset = set(vs)
        for i in range(n):
            for step in (1, -1):
                a2, b2, c2 = vs[i], vs[(i + step) % n], vs[(i + 2 * step) % n]
                u2 = (b2[0] - a2[0], b2[1] - a2[1])
                w2 = (c2[0] - a2[0], c2[1] - a2[1])
                # M = [u2 w2] [u w]^{-1}
                num = ((u2[0] * w[1] - w2[0] * u[1], -u2[0] * w[0] + w2[0] * u[0]),
                       (u2[1] * w[1] - w2[1] * u[1], -u2[1] * w[0] + w2[1] * u[0]))
                if any(x % det for row in num for x in row):
                    continue
                M = tuple(tuple(x // det for x in row) for row in num)
                if abs(M[0][0] * M[1][1] - M[0][1] * M[1][0]) != 1:
                    continue
                t = (a2[0] - M[0][0] * a[0] - M[0][1] * a[1], a2[1] - M[1][0] * a[0] - M[1][1] * a[1])
                img = {(M[0][0] * x + M[0][1] * y + t[0], M[1][0] * x + M[1][1] * y + t[1]) for x, y in vs}
                if img == vset:
                    out.append((M, t))
        return sorted(set(out))


# ---------------------------------------------------------------- checks

@dataclass(frozen=True)
class FaceCheck:
    rays: tuple[Vector, ...]
    invariant_factors: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return all(d == 1 for d in self.invariant_factors)


@dataclass(frozen=True)
class GoodnessReport:
    faces: tuple[FaceCheck, ...]

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.faces)

    def failures(self) -> list[FaceCheck]:
        return [f for f in self.faces if not f.ok]


def _goodness(base: RationalCone) -> GoodnessReport:
    faces = []
    # rays are primitive, so 1-dimensional faces always pass; the 2-faces carry the content
    for r in base.rays:
        faces.append(FaceCheck((r,), (1,)))
    for pair in base.faces2():
        faces.append(FaceCheck(tuple(pair), tuple(invariant_factors([list(v) for v in pair]))))
    return GoodnessReport(tuple(faces))


def gorenstein_functional(base: RationalCone) -> Vector | None:
    """Integral m with <m, r> = 1 for every ray, or None when none exists."""
    m = solve_rational([list(r) for r in base.rays], [1] * len(base.rays))
    if m is None or any(x.denominator != 1 for x in m):
        return None
    return tuple(int(x) for x in m)


def _polygon_basis(base: RationalCone) -> tuple[IntMatrix, LatticePolygon] | None:
    m = gorenstein_functional(base)
    if m is None:
        return None
    g = complete_to_basis(m)
    pts = [matvec(g, r)[1:] for r in base.rays]
    hull = convex_hull(pts)
    if len(hull) != len(pts):
        return None
    return g, LatticePolygon(tuple(hull))


# ------------------------------------------------------------------ cones

@dataclass(frozen=True)
class GoodCone:
    """A good 3-dimensional cone, in height-one coordinates when Gorenstein.

    ``input_rays`` keeps the primitive rays in the order and basis they were
    given; ``basis`` is the unimodular matrix taking them to ``base``.
    """

    base: RationalCone
    label: str = ""
    input_rays: tuple[Vector, ...] = ()
    basis: IntMatrix = field(default_factory=lambda: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], compare=False)
    polygon: LatticePolygon | None = None
    goodness: GoodnessReport | None = field(default=None, compare=False)

    @property
    def gorenstein(self) -> bool:
        return self.polygon is not None

    @classmethod
    def from_rays(cls, rays: Sequence[Sequence[int]], label: str = "", require_good: bool = True) -> "GoodCone":
        raw = RationalCone(tuple(tuple(int(x) for x in r) for r in rays))
        report = _goodness(raw)
        if require_good and not report.ok:
            bad = ", ".join(str(f.rays) for f in report.failures())
            raise NotGood(f"face sublattice not spanned by its rays: {bad}")
        found = _polygon_basis(raw)
        if found is None:
            return cls(raw, label, raw.rays, goodness=report)
        g, poly = found
        return cls(raw.transform(g), label, raw.rays, g, poly, report)

    @classmethod
    def from_polygon(cls, polygon: LatticePolygon | Sequence[Point], label: str = "") -> "GoodCone":
        if not isinstance(polygon, LatticePolygon):
            polygon = LatticePolygon.from_points(polygon)
        return cls.from_rays([(1, x, y) for x, y in polygon.vertices], label)

    def serialize(self) -> str:
        lines = []
        if self.label:
            lines.append(f"name: {self.label}")
        for r in self.input_rays:
            lines.append("ray: " + " ".join(str(x) for x in r))
        return "\n".join(lines) + "\n"


_RAY = re.compile(r"^ray:\s*(-?\d+) (-?\d+) (-?\d+)\s*$")


def parse_cone(text: str, require_good: bool = True) -> GoodCone:
    """Read the cone file format: optional ``name:`` line, ``ray: i j k`` lines, ``#`` comments."""
    label = ""
    rays: list[Vector] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("name:"):
            if label:
                raise ParseError(f"line {lineno}: duplicate name")
            label = line[5:].strip()
            continue
        m = _RAY.match(line)
        if not m:
            raise ParseError(f"line {lineno}: cannot parse {raw!r}")
        v = tuple(int(x) for x in m.groups())
        if not any(v):
            raise ParseError(f"line {lineno}: zero ray")
        rays.append(primitive(v))
    if not rays:
        raise ParseError("no rays given")
    return GoodCone.from_rays(rays, label, require_good)


def check_good(c: GoodCone | RationalCone) -> GoodnessReport:
    base = c.base if isinstance(c, GoodCone) else c
    return _goodness(base)


def check_gorenstein_height_one(c: GoodCone | RationalCone) -> tuple[bool, LatticePolygon | None]:
    base = c.base if isinstance(c, GoodCone) else c
    found = _polygon_basis(base)
    if found is None:
        return False, None
    return True, found[1]


def gorenstein_explanation(c: GoodCone | RationalCone) -> str:
    """Why a cone is or is not Gorenstein, in one line."""
    base = c.base if isinstance(c, GoodCone) else c
    m = solve_rational([list(r) for r in base.rays], [1] * len(base.rays))
    if m is None:
        return "no linear functional takes the value 1 on every ray"
    if any(x.denominator != 1 for x in m):
        den = 1
        for x in m:
            den = den * x.denominator // gcd(den, x.denominator)
        mm = tuple(int(x * den) for x in m)
        return f"rays lie on a common plane only at height {den} (functional {mm})"
    return f"all rays at height one for functional {tuple(int(x) for x in m)}"


# ----------------------------------------------------------- toric ideal

@dataclass
class ToricIdeal:
    hilbert_basis: list[Vector]
    generators: list[Poly]
    degrees: list[int]
    generated: bool
    max_degree: int

    @property
    def ambient_dim(self) -> int:
        return len(self.hilbert_basis)

    def count(self, degree: int) -> int:
        return sum(1 for d in self.degrees if d == degree)


def _compositions(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in _compositions(n - 1, d - k):
            yield (k,) + rest


def _image(u: Sequence[int], hb: Sequence[Vector]) -> Vector:
    return tuple(sum(k * h[i] for k, h in zip(u, hb)) for i in range(3))


def _lattice_generated(moves: list[tuple[int, ...]], n: int) -> bool:
    if not moves:
        return n == 3
    if rank(moves) != n - 3:
        return False
    return all(d == 1 for d in invariant_factors([list(m) for m in moves])[: n - 3])


def _saturated(gens: list[Poly], cap: int) -> bool:
    """True when the ideal is saturated with respect to every variable.

    Uses grevlex with the variable last: J : x^inf = J iff no reduced basis
    element is divisible by x.
    """
    if not gens:
        return True
    names = gens[0].vars
    for i, v in enumerate(names):
        order = [x for x in names if x != v] + [v]
        G = groebner([g.embed(order) for g in gens], "grevlex", cap=cap)
        last = len(order) - 1
        if any(all(e[last] > 0 for e in p.terms) for p in G.polys):
            return False
    return True


def toric_ideal(c: GoodCone | RationalCone, max_degree: int = 2, degree_cap: int = 64,
                groebner_cap: int = 20000) -> ToricIdeal:
    """Binomial generators up to ``max_degree`` of the ideal of the Hilbert-basis embedding.

    The count in each degree d is the number of connected components minus
    one of every fiber of degree-d monomials, where fibers are joined by the
    lower-degree moves already found.  ``generated`` is decided exactly: the
    moves must span the relation lattice and the ideal they generate must be
    saturated by each variable.
    """
    base = c.base if isinstance(c, GoodCone) else c
    hb = hilbert_basis(dual_cone(base), degree_cap)
    n = len(hb)
    grading = solve_rational([list(h) for h in hb], [1] * n)
    if grading is None:
        raise ValueError("Hilbert basis is not on a hyperplane; graded generator count unavailable")
    names = tuple(f"x{i + 1}" for i in range(n))
    moves: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    degrees: list[int] = []
    for d in range(2, max_degree + 1):
        fibers: dict[Vector, list[tuple[int, ...]]] = {}
        for u in _compositions(n, d):
            fibers.setdefault(_image(u, hb), []).append(u)
        for mons in fibers.values():
            if len(mons) < 2:
                continue
            index = {u: k for k, u in enumerate(mons)}
            parent = list(range(len(mons)))

            def find(k):
                while parent[k] != k:
                    parent[k] = parent[parent[k]]
                    k = parent[k]
                return k

            for u in mons:
                for p, q in moves:
                    for a, b in ((p, q), (q, p)):
                        if all(x >= y for x, y in zip(u, a)):
                            v = tuple(x - y + z for x, y, z in zip(u, a, b))
                            parent[find(index[u])] = find(index[v])
            roots = sorted({find(k) for k in range(len(mons))})
            for r in roots[1:]:
                moves.append((mons[roots[0]], mons[r]))
                degrees.append(d)
    gens = [Poly(names, {p: 1, q: -1}) for p, q in moves]
    generated = _lattice_generated([tuple(a - b for a, b in zip(p, q)) for p, q in moves], n)
    if generated:
        generated = _saturated(gens, groebner_cap)
    return ToricIdeal(hb, gens, degrees, generated, max_degree)


def monomial_parametrization(ideal: ToricIdeal) -> dict[str, Poly]:
    """x_i -> the Laurent monomial t^h_i, shifted to a polynomial by a common monomial.

    Substituting into the generators gives zero exactly when they vanish on
    the torus orbit.
    """
    hb = ideal.hilbert_basis
    shift = [-min(0, min(h[i] for h in hb)) for i in range(3)]
    tv = ("t1", "t2", "t3")
    return {
        f"x{k + 1}": Poly.monomial(tv, tuple(h[i] + shift[i] for i in range(3)))
        for k, h in enumerate(hb)
    }
