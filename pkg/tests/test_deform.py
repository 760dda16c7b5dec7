from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from cyconekit.deform import (
    check_negative_weights, edge_vectors, minkowski_decompositions, minkowski_sum,
    polygon_from_edges, rigidity, xi_weight,
)
from cyconekit.errors import EmptyApproximants, NoDeformation, SizeCapExceeded
from cyconekit.reeb import DirichletApproximant, dirichlet_approximants, minimize_volume
from cyconekit.toric import LatticePolygon, convex_hull, parse_cone

from conftest import POLYGONS, cone_file


def normalize(pts):
    hull = convex_hull(pts)
    ox, oy = min(hull)
    return tuple(sorted((x - ox, y - oy) for x, y in hull))


def brute_two_summand_splits(p: LatticePolygon) -> set:
    """Unordered pairs {Q, R} of lattice polytopes (not points) with Q + R = P."""
    target = normalize(p.vertices)
    pts = p.lattice_points
    found = set()
    for k in range(2, len(pts) + 1):
        for sub in combinations(pts, k):
            q = normalize(sub)
            if q == target or len(set(sub)) < 2:
                continue
            shifts = [r for r in pts
                      if all(p.contains((r[0] + x, r[1] + y)) for x, y in q)]
            if len(shifts) < 2:
                continue
            r = normalize(shifts)
            if normalize(minkowski_sum([q, r])) == target:
                found.add(frozenset((q, r)) if q != r else frozenset((q,)))
    return found


@pytest.mark.parametrize("name, count", [("p2", 0), ("conifold", 1), ("dp1", 0), ("dp2", 1), ("dp3", 5)])
def test_decomposition_counts(name, count):
    p = LatticePolygon.from_points(POLYGONS[name])
    decs = minkowski_decompositions(p)
    assert len(decs) == count
    for d in decs:
        assert normalize(d.reconstruct()) == normalize(p.vertices)
        assert all(len(s) >= 2 for s in d.summands)


@pytest.mark.parametrize("name", ["p2", "conifold", "dp1", "dp2", "dp3"])
def test_two_summand_decompositions_match_brute_force(name):
    p = LatticePolygon.from_points(POLYGONS[name])
    ours = set()
    for d in minkowski_decompositions(p):
        if len(d.summands) == 2:
            a, b = (tuple(sorted(s)) for s in d.summands)
            ours.add(frozenset((a, b)) if a != b else frozenset((a,)))
    assert ours == brute_two_summand_splits(p)


def test_square_splits_into_two_segments():
    [d] = minkowski_decompositions(LatticePolygon.from_points(POLYGONS["conifold"]))
    assert sorted(d.summands) == [((0, 0), (0, 1)), ((0, 0), (1, 0))]
    assert d.multiplicity_free


def test_dp2_splits_into_triangle_and_segment():
    [d] = minkowski_decompositions(LatticePolygon.from_points(POLYGONS["dp2"]))
    assert sorted(len(s) for s in d.summands) == [2, 3]


def test_edge_vectors_close_up():
    for pts in POLYGONS.values():
        p = LatticePolygon.from_points(pts)
        vecs = [v for v, k in edge_vectors(p) for _ in range(k)]
        assert sum(v[0] for v in vecs) == 0 and sum(v[1] for v in vecs) == 0
        assert normalize(polygon_from_edges(vecs)) == normalize(p.vertices)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=2, max_size=3),
       st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=2, max_size=3))
def test_sums_decompose(a, b):
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    pts = minkowski_sum([convex_hull(a), convex_hull(b)])
    if len(pts) < 3:
        return
    p = LatticePolygon(tuple(pts))
    if len(p.vertices) > 12:
        return
    # a sum of two non-point polytopes is never indecomposable
    assert minkowski_decompositions(p)


def test_size_cap():
    p = LatticePolygon.from_points(POLYGONS["dp3"])
    with pytest.raises(SizeCapExceeded):
        minkowski_decompositions(p, max_vertices=5)


# ---------------------------------------------------------------- verdicts

@pytest.mark.parametrize("name, rigid, params", [
    ("c3z3", True, 0), ("dp1", True, 0), ("height2", True, 0), ("c3", True, 0),
    ("conifold", False, 1), ("dp2", False, 1), ("dp3", False, 5),
])
def test_rigidity(name, rigid, params):
    v = rigidity(parse_cone(cone_file(name)))
    assert v.rigid is rigid and v.parameters == params
    assert str(v) == ("Rigid" if rigid else f"Smoothable({params})")


def test_xi_weight_conifold(cones):
    [ap] = dirichlet_approximants((3, Fraction(3, 2), Fraction(3, 2)), 1, cones["conifold"])
    cert = xi_weight(cones["conifold"], [ap])
    [rec] = cert.records
    assert (rec.c, rec.mu, rec.k, rec.weight) == (2, 6, 1, -3)
    assert cert.limit == -3


def test_xi_weight_dp2(cones):
    c = cones["dp2"]
    aps = dirichlet_approximants(minimize_volume(c).xi, 5, c)
    cert = xi_weight(c, aps)
    assert [r.weight for r in cert.records] == [-3] * 5
    assert all(r.mu == 3 * r.c for r in cert.records)


def test_xi_weight_failures(cones):
    ap = DirichletApproximant((3, Fraction(0), Fraction(0)), 1, Fraction(0))
    with pytest.raises(NoDeformation):
        xi_weight(cones["c3z3"], [ap])
    with pytest.raises(EmptyApproximants):
        xi_weight(cones["conifold"], [])
    wrong = DirichletApproximant((3, Fraction(1, 2), Fraction(1, 2)), 4, Fraction(0))
    with pytest.raises(ValueError):
        xi_weight(cones["conifold"], [wrong])


def test_check_negative_weights():
    ok, worst = check_negative_weights([(2, 6, 1), (3, 9, 1)], Fraction(3))
    assert ok and worst == -3
    ok, worst = check_negative_weights([(2, 6, 1), (4, 6, 1)], Fraction(2))
    assert not ok and worst == Fraction(-3, 2)
    with pytest.raises(ValueError):
        check_negative_weights([(0, 1, 1)], Fraction(1))
    with pytest.raises(ValueError):
        check_negative_weights([(1, 1, 1)], Fraction(0))
    with pytest.raises(EmptyApproximants):
        check_negative_weights([], Fraction(1))
