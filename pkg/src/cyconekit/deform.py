"""Minkowski decompositions of lattice polygons, rigidity, and xi-weights of toric smoothings."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from itertools import product
from math import gcd
from typing import Sequence

from .errors import EmptyApproximants, NoDeformation, SizeCapExceeded
from .reeb import DirichletApproximant, minimal_denominator
from .toric import GoodCone, LatticePolygon, Point, convex_hull

MAX_VERTICES = 12
MAX_SUBSETS = 200000


def _angle_cmp(u: Point, v: Point) -> int:
    def half(w):
        return 0 if (w[1] > 0 or (w[1] == 0 and w[0] > 0)) else 1

    hu, hv = half(u), half(v)
    if hu != hv:
        return hu - hv
    cr = u[0] * v[1] - u[1] * v[0]
    return -1 if cr > 0 else (1 if cr < 0 else 0)


def edge_vectors(p: LatticePolygon) -> list[tuple[Point, int]]:
    """Primitive edge directions of ``p`` with their lattice lengths."""
    out = []
    for a, b in p.edges():
        dx, dy = b[0] - a[0], b[1] - a[1]
        g = gcd(dx, dy)
        out.append(((dx // g, dy // g), g))
    return out


def polygon_from_edges(vectors: Sequence[Point]) -> tuple[Point, ...]:
    """Vertices of the lattice polygon (or segment) with the given closed edge multiset.

    Normalized so the lexicographically smallest vertex is the origin.
    """
    vs = sorted(vectors, key=cmp_to_key(_angle_cmp))
    pts = [(0, 0)]
    for v in vs:
        x, y = pts[-1]
        pts.append((x + v[0], y + v[1]))
    if pts[-1] != (0, 0):
        raise ValueError("edge vectors do not close up")
    hull = convex_hull(pts[:-1])
    ox, oy = min(hull)
    return tuple((x - ox, y - oy) for x, y in hull)


def minkowski_sum(summands: Sequence[Sequence[Point]]) -> tuple[Point, ...]:
    pts = [(0, 0)]
    for s in summands:
        pts = [(p[0] + q[0], p[1] + q[1]) for p in pts for q in s]
        pts = convex_hull(pts)
    return tuple(pts)


@dataclass(frozen=True)
class MinkowskiDecomposition:
    """Summands as vertex tuples (two vertices for a segment), lowest vertex at the origin."""

    summands: tuple[tuple[Point, ...], ...]

    @property
    def multiplicity_free(self) -> bool:
        return len(set(self.summands)) == len(self.summands)

    def reconstruct(self) -> tuple[Point, ...]:
        return minkowski_sum(self.summands)


def _normalized(p: Sequence[Point]) -> tuple[Point, ...]:
    hull = convex_hull(p)
    ox, oy = min(hull)
    return tuple(sorted((x - ox, y - oy) for x, y in hull))


def minkowski_decompositions(p: LatticePolygon, max_vertices: int = MAX_VERTICES) -> list[MinkowskiDecomposition]:
    """All decompositions into at least two summands with two or more lattice points each.

    Works on the multiset of primitive edge vectors: a decomposition is a
    partition of that multiset into zero-sum blocks, each block closing up to
    one summand.
    """
    if len(p.vertices) > max_vertices:
        raise SizeCapExceeded(f"polygon has more than {max_vertices} vertices")
    counts: dict[Point, int] = {}
    for v, k in edge_vectors(p):
        counts[v] = counts.get(v, 0) + k
    dirs = sorted(counts, key=cmp_to_key(_angle_cmp))
    total = tuple(counts[d] for d in dirs)
    size = 1
    for m in total:
        size *= m + 1
    if size > MAX_SUBSETS:
        raise SizeCapExceeded("edge multiset too large for exhaustive search")

    # zero-sum sub-multisets, as count vectors
    blocks = []
    for cnt in product(*(range(m + 1) for m in total)):
        if not any(cnt):
            continue
        sx = sum(c * d[0] for c, d in zip(cnt, dirs))
        sy = sum(c * d[1] for c, d in zip(cnt, dirs))
        if sx == 0 and sy == 0:
            blocks.append(cnt)

    found: set[tuple] = set()

    def rec(rem: tuple, chosen: list):
        if not any(rem):
            if len(chosen) >= 2:
                found.add(tuple(sorted(chosen)))
            return
        first = next(i for i, x in enumerate(rem) if x)
        for b in blocks:
            if b[first] and all(x <= y for x, y in zip(b, rem)):
                rec(tuple(y - x for x, y in zip(b, rem)), chosen + [b])

    rec(total, [])
    out = []
    for parts in found:
        summands = []
        for b in parts:
            vecs = [d for d, c in zip(dirs, b) for _ in range(c)]
            summands.append(tuple(sorted(polygon_from_edges(vecs))))
        out.append(MinkowskiDecomposition(tuple(sorted(summands))))
    out.sort(key=lambda d: (len(d.summands), d.summands))
    return out


@dataclass(frozen=True)
class RigidityVerdict:
    rigid: bool
    parameters: int
    reason: str
    decompositions: tuple[MinkowskiDecomposition, ...] = field(default=(), compare=False)

    def __str__(self) -> str:
        return "Rigid" if self.rigid else f"Smoothable({self.parameters})"


def rigidity(c: GoodCone) -> RigidityVerdict:
    """Rigid iff the polygon has no Minkowski decomposition.

    One parameter is counted per decomposition.  A non-Gorenstein simplicial
    good cone is an isolated quotient singularity and is reported rigid.
    """
    if c.polygon is None:
        if len(c.base.rays) == 3:
            return RigidityVerdict(True, 0, "isolated cyclic quotient singularity (simplicial, not Gorenstein)")
        raise NoDeformation("non-Gorenstein cone with more than three rays is out of scope")
    decs = minkowski_decompositions(c.polygon)
    if not decs:
        return RigidityVerdict(True, 0, "polygon is Minkowski indecomposable")
    return RigidityVerdict(False, len(decs), f"{len(decs)} Minkowski decomposition(s)", tuple(decs))


# ------------------------------------------------------------------ weights

@dataclass(frozen=True)
class XiWeightRecord:
    xi: tuple[int, Fraction, Fraction]
    c: int
    mu: int
    k: int
    weight: Fraction


@dataclass(frozen=True)
class XiWeightCertificate:
    records: tuple[XiWeightRecord, ...]
    limit: Fraction
    note: str = "k = 1 for every sub-deformation of the toric versal family (taken as given, not computed)"


def xi_weight(c: GoodCone, approx: Sequence[DirichletApproximant]) -> XiWeightCertificate:
    """Weights ``lambda_i = -k_i mu_i / c_i`` along rational approximants of the Reeb vector.

    Uses ``mu_i = 3 c_i`` and ``k_i = 1``; every identity is rechecked in exact
    arithmetic.
    """
    verdict = rigidity(c)
    if verdict.rigid:
        raise NoDeformation(f"cone is rigid: {verdict.reason}")
    if not approx:
        raise EmptyApproximants("at least one approximant is required")
    records = []
    for ap in approx:
        if minimal_denominator(ap.xi) != ap.c:
            raise ValueError(f"c = {ap.c} is not the minimal denominator of {ap.xi}")
        mu, k = 3 * ap.c, 1
        lam = Fraction(-k * mu, ap.c)
        if lam * ap.c + k * mu != 0:
            raise ArithmeticError("weight identity failed")
        records.append(XiWeightRecord(ap.xi, ap.c, mu, k, lam))
    limit = max(r.weight for r in records)
    return XiWeightCertificate(tuple(records), limit)


def check_negative_weights(triples: Sequence[tuple[int, int, int]], bound: Fraction) -> tuple[bool, Fraction]:
    """Check ``-k*mu/c <= -bound`` for user-supplied ``(c, mu, k)`` triples.

    Returns the verdict and the largest weight seen.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if not triples:
        raise EmptyApproximants("no triples supplied")
    weights = []
    for c, mu, k in triples:
        if c <= 0 or mu <= 0 or k <= 0:
            raise ValueError("c, mu and k must be positive")
        weights.append(Fraction(-k * mu, c))
    worst = max(weights)
    return worst <= -Fraction(bound), worst
