"""Crepant resolutions of Gorenstein toric threefold cones as unimodular triangulations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .errors import SizeCapExceeded
from .lp import feasible_point
from .toric import LatticePolygon, Point, _orient

MAX_POINTS = 16
_EPS = (Fraction(1, 10007), Fraction(1, 100003))


def _separated(t1, t2) -> bool:
    """True when the closed-halfplane separating-axis test finds a gap between interiors."""
    for tri, other in ((t1, t2), (t2, t1)):
        for i in range(3):
            a, b, c = tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]
            side = _orient(a, b, c)
            if all(_orient(a, b, q) * side <= 0 for q in other):
                return True
    return False


def _strictly_inside(tri, p) -> bool:
    s = [_orient(tri[i], tri[(i + 1) % 3], p) for i in range(3)]
    return all(x > 0 for x in s) or all(x < 0 for x in s)


@dataclass(frozen=True)
class Triangulation:
    """Cells are sorted index triples into ``points`` (the polygon's lattice points)."""

    points: tuple[Point, ...]
    cells: tuple[tuple[int, int, int], ...]

    @cached_property
    def adjacency(self) -> dict[tuple[int, int], list[int]]:
        """Edge -> indices of the cells containing it."""
        out: dict[tuple[int, int], list[int]] = {}
        for k, cell in enumerate(self.cells):
            for e in combinations(cell, 2):
                out.setdefault(e, []).append(k)
        return out

    def interior_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, cs in self.adjacency.items() if len(cs) == 2)

    def opposite(self, edge: tuple[int, int]) -> tuple[int, int]:
        c1, c2 = (self.cells[k] for k in self.adjacency[edge])
        k = next(v for v in c1 if v not in edge)
        l = next(v for v in c2 if v not in edge)
        return k, l

    def is_flippable(self, edge: tuple[int, int]) -> bool:
        i, j = edge
        k, l = self.opposite(edge)
        P = self.points
        return _orient(P[k], P[l], P[i]) * _orient(P[k], P[l], P[j]) < 0

    def flip(self, edge: tuple[int, int]) -> "Triangulation":
        i, j = edge
        k, l = self.opposite(edge)
        drop = set(self.adjacency[edge])
        cells = [c for n, c in enumerate(self.cells) if n not in drop]
        cells += [tuple(sorted((k, l, i))), tuple(sorted((k, l, j)))]
        return Triangulation(self.points, tuple(sorted(cells)))

    def normalized_area(self) -> int:
        P = self.points
        return sum(abs(_orient(P[a], P[b], P[c])) for a, b, c in self.cells)


def enumerate_crepant(p: LatticePolygon, max_points: int = MAX_POINTS) -> list[Triangulation]:
    """Every unimodular triangulation of ``p``, in canonical order.

    Depth-first cover search: repeatedly take the first sample point (a
    slightly perturbed centroid of a unimodular triangle) not yet covered and
    branch on the compatible unimodular triangles containing it.
    """
    pts = tuple(sorted(p.lattice_points))
    if len(pts) > max_points:
        raise SizeCapExceeded(f"{len(pts)} lattice points exceed the cap of {max_points}")
    cands = [t for t in combinations(range(len(pts)), 3)
             if abs(_orient(pts[t[0]], pts[t[1]], pts[t[2]])) == 1]
    coords = {t: tuple(pts[i] for i in t) for t in cands}
    samples = []
    for t in cands:
        a, b, c = coords[t]
        samples.append((Fraction(a[0] + b[0] + c[0], 3) + _EPS[0],
                        Fraction(a[1] + b[1] + c[1], 3) + _EPS[1]))
    samples = sorted(set(samples))
    containing = {s: [t for t in cands if _strictly_inside(coords[t], s)] for s in samples}
    target = p.area2
    found: set[tuple] = set()

    def rec(chosen: list):
        if len(chosen) == target:
            found.add(tuple(sorted(chosen)))
            return
        s = next(s for s in samples if not any(_strictly_inside(coords[t], s) for t in chosen))
        for t in containing[s]:
            if all(_separated(coords[t], coords[u]) for u in chosen):
                rec(chosen + [t])

    rec([])
    return [Triangulation(pts, cells) for cells in sorted(found)]


def flops(t: Triangulation) -> list[Triangulation]:
    """Triangulations one bistellar flip away (flip of a convex quadrilateral's diagonal)."""
    out = {t.flip(e).cells for e in t.interior_edges() if t.is_flippable(e)}
    return [Triangulation(t.points, c) for c in sorted(out)]


def flip_graph(ts: list[Triangulation]) -> list[tuple[int, int]]:
    index = {t.cells: n for n, t in enumerate(ts)}
    edges = set()
    for n, t in enumerate(ts):
        for f in flops(t):
            m = index.get(f.cells)
            if m is not None:
                edges.add((min(n, m), max(n, m)))
    return sorted(edges)


def symmetry_classes(p: LatticePolygon, ts: list[Triangulation]) -> list[list[int]]:
    """Group triangulations (indices into ``ts``) that differ by an automorphism of ``p``."""
    maps = p.automorphisms()
    seen: dict[tuple, list[int]] = {}
    for n, t in enumerate(ts):
        index = {q: k for k, q in enumerate(t.points)}
        keys = []
        for (m, s) in maps:
            img = [index[(m[0][0] * x + m[0][1] * y + s[0], m[1][0] * x + m[1][1] * y + s[1])]
                   for x, y in t.points]
            keys.append(tuple(sorted(tuple(sorted(img[i] for i in c)) for c in t.cells)))
        seen.setdefault(min(keys), []).append(n)
    return sorted(seen.values())


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    heights: tuple[Fraction, ...] | None
    float_precheck: bool | None
    note: str = ("regularity (a strictly convex piecewise-linear lift) is used as the "
                 "Kähler criterion for the toric resolution")


def _convexity_rows(t: Triangulation) -> list[list[int]]:
    rows = []
    P = t.points
    for e in t.interior_edges():
        i, j = e
        k, l = t.opposite(e)
        # affine interpolation on (i, j, k) evaluated at l, via barycentric coordinates
        d = _orient(P[i], P[j], P[k])
        wi = _orient(P[l], P[j], P[k])
        wj = _orient(P[i], P[l], P[k])
        wk = _orient(P[i], P[j], P[l])
        row = [0] * len(P)
        row[l] += d
        row[i] -= wi
        row[j] -= wj
        row[k] -= wk
        if d < 0:
            row = [-x for x in row]
        rows.append(row)
    return rows


def _float_precheck(rows) -> bool | None:
    try:
        import numpy as np
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    if not rows:
        return True
    a = np.array(rows, dtype=float)
    res = linprog(np.zeros(a.shape[1]), A_ub=-a, b_ub=-np.ones(len(rows)),
                  bounds=[(0, None)] * a.shape[1], method="highs")
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    return None


def is_regular(t: Triangulation) -> RegularityReport:
    """Exact test for a height function that bends up by at least 1 across every interior edge."""
    rows = _convexity_rows(t)
    pre = _float_precheck(rows)
    h = feasible_point(rows, [1] * len(rows))
    if h is not None:
        for row in rows:
            assert sum(c * x for c, x in zip(row, h)) >= 1
    return RegularityReport(h is not None, tuple(h) if h is not None else None, pre)


# --------------------------------------------------------- terminal models

@dataclass(frozen=True)
class Subdivision:
    points: tuple[Point, ...]
    cells: tuple[tuple[int, ...], ...]
    odp: tuple[bool, ...] = field(default=())

    def normalized_area(self) -> int:
        P = self.points
        total = 0
        for cell in self.cells:
            vs = [P[i] for i in cell]
            total += sum(_orient(vs[0], vs[m], vs[m + 1]) for m in range(1, len(vs) - 1))
        return total


def _best_matching(t: Triangulation) -> list[tuple[int, int]]:
    edges = [e for e in t.interior_edges() if t.is_flippable(e)]
    cells_of = {e: set(t.adjacency[e]) for e in edges}
    best: list = []

    def rec(i, used: set, chosen: list):
        nonlocal best
        if len(chosen) + (len(edges) - i) <= len(best):
            return
        if i == len(edges):
            best = list(chosen)
            return
        e = edges[i]
        if not (cells_of[e] & used):
            rec(i + 1, used | cells_of[e], chosen + [e])
        rec(i + 1, used, chosen)

    rec(0, set(), [])
    return best


def terminal_partial(p: LatticePolygon, max_points: int = MAX_POINTS) -> Subdivision:
    """Coarsest subdivision into unimodular triangles and empty parallelograms.

    Parallelogram cells are ordinary double points.  Every candidate comes
    from merging disjoint flippable pairs of some unimodular triangulation;
    the one with fewest cells (then canonical order) is returned.
    """
    best = None
    for t in enumerate_crepant(p, max_points):
        match = _best_matching(t)
        merged = set()
        cells = []
        odp = []
        P = t.points
        for e in match:
            i, j = e
            k, l = t.opposite(e)
            quad = [i, k, j, l]
            # counterclockwise order
            if _orient(P[quad[0]], P[quad[1]], P[quad[2]]) < 0:
                quad = [i, l, j, k]
            start = quad.index(min(quad))
            cells.append(tuple(quad[start:] + quad[:start]))
            odp.append(True)
            merged |= set(t.adjacency[e])
        for n, c in enumerate(t.cells):
            if n not in merged:
                a, b, cc = c
                cells.append((a, b, cc) if _orient(P[a], P[b], P[cc]) > 0 else (a, cc, b))
                odp.append(False)
        order = sorted(range(len(cells)), key=lambda m: cells[m])
        sub = Subdivision(P, tuple(cells[m] for m in order), tuple(odp[m] for m in order))
        key = (len(sub.cells), sub.cells)
        if best is None or key < best[0]:
            best = (key, sub)
    return best[1]
