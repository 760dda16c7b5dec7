from itertools import combinations_with_replacement
from math import comb

import pytest

from cyconekit.errors import NotGood, NotStronglyConvex, ParseError
from cyconekit.lattice import RationalCone, dual_cone, hilbert_basis
from cyconekit.toric import (
    GoodCone, LatticePolygon, check_good, check_gorenstein_height_one, convex_hull,
    gorenstein_explanation, monomial_parametrization, parse_cone, toric_ideal,
)

from conftest import POLYGONS, cone_file


def quadric_oracle(c: GoodCone) -> int:
    """dim I_2: degree-2 monomials minus distinct pairwise sums of the Hilbert basis."""
    hb = hilbert_basis(dual_cone(c.base))
    sums = {tuple(a + b for a, b in zip(p, q)) for p, q in combinations_with_replacement(hb, 2)}
    return comb(len(hb) + 1, 2) - len(sums)


def test_from_rays_conifold_polygon():
    c = GoodCone.from_rays([(1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1)])
    ok, poly = check_gorenstein_height_one(c)
    assert ok and c.gorenstein
    assert len(poly.vertices) == 4 and poly.area2 == 2
    assert len(poly.lattice_points) == 4 and not poly.interior_points


def test_c3z3_polygon():
    c = GoodCone.from_rays([(1, 1, 0), (1, 0, 1), (1, -1, -1)])
    assert c.polygon.area2 == 3
    assert len(c.polygon.interior_points) == 1
    assert len(c.polygon.lattice_points) == 4


def test_line_is_rejected():
    with pytest.raises(NotStronglyConvex):
        GoodCone.from_rays([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, 0, 1)])


def test_goodness():
    conifold = GoodCone.from_rays([(1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1)])
    assert check_good(conifold).ok
    assert check_good(RationalCone(((1, 0, 0), (1, 1, 0), (1, 0, 1)))).ok
    bad = RationalCone(((1, 0, 0), (1, 2, 0), (1, 0, 1)))
    report = check_good(bad)
    assert not report.ok
    [fail] = report.failures()
    assert set(fail.rays) == {(1, 0, 0), (1, 2, 0)} and fail.invariant_factors == (1, 2)
    with pytest.raises(NotGood):
        GoodCone.from_rays(bad.rays)


def test_height_two_cone_flagged():
    c = parse_cone(cone_file("height2"))
    assert not c.gorenstein
    ok, poly = check_gorenstein_height_one(c)
    assert not ok and poly is None
    assert "height 2" in gorenstein_explanation(c)


@pytest.mark.parametrize("name", ["c3", "c3z3", "conifold", "dp1", "dp2", "dp3", "height2"])
def test_serialize_round_trip(name):
    c = parse_cone(cone_file(name))
    again = parse_cone(c.serialize())
    assert again.input_rays == c.input_rays and again.label == c.label
    assert again.base == c.base


@pytest.mark.parametrize("text", ["ray: 1 0", "ray: 0 0 0", "name: a\nname: b\nray: 1 0 0", "", "ray: a b c"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_cone(text)


def test_malformed_data_file():
    with pytest.raises(ParseError):
        parse_cone(cone_file("malformed"))


@pytest.mark.parametrize("name, polygon", [(k, POLYGONS[k]) for k in ("c3z3", "conifold", "dp1", "dp2", "dp3")
                                          if k in POLYGONS] + [("c3z3", POLYGONS["p2"])])
def test_polygon_matches_reference_up_to_lattice_equivalence(cones, name, polygon):
    ref = LatticePolygon.from_points(polygon)
    p = cones[name].polygon
    assert p.area2 == ref.area2
    assert len(p.vertices) == len(ref.vertices)
    assert len(p.interior_points) == len(ref.interior_points)
    assert len(p.boundary_points) == len(ref.boundary_points)


@pytest.mark.parametrize("name, quadrics, ambient", [
    ("c3z3", 27, 10), ("conifold", 1, 4), ("dp1", 20, 9), ("dp2", 14, 8), ("dp3", 9, 7),
])
def test_quadric_counts(cones, name, quadrics, ambient):
    ideal = toric_ideal(cones[name])
    assert ideal.count(2) == quadrics == quadric_oracle(cones[name])
    assert ideal.ambient_dim == ambient
    assert ideal.generated


def test_flat_space_has_no_relations(cones):
    ideal = toric_ideal(cones["c3"])
    assert ideal.ambient_dim == 3 and ideal.generators == [] and ideal.generated


@pytest.mark.parametrize("name", ["conifold", "dp2", "dp3"])
def test_generators_vanish_on_the_torus(cones, name):
    ideal = toric_ideal(cones[name])
    sub = monomial_parametrization(ideal)
    for g in ideal.generators:
        assert g.subs(sub, ("t1", "t2", "t3")).is_zero()
        assert set(g.terms.values()) == {1, -1}


def test_convex_hull_and_polygon_validation():
    assert convex_hull([(0, 0), (2, 0), (1, 1), (0, 2), (2, 2), (1, 0)]) == [(0, 0), (2, 0), (2, 2), (0, 2)]
    with pytest.raises(ValueError):
        LatticePolygon(((0, 0), (0, 1), (1, 0)))
    with pytest.raises(ValueError):
        LatticePolygon(((0, 0), (1, 0), (2, 0), (0, 1)))


@pytest.mark.parametrize("name, count", [("p2", 6), ("conifold", 8), ("dp1", 2), ("dp2", 2), ("dp3", 12)])
def test_automorphism_groups(name, count):
    p = LatticePolygon.from_points(POLYGONS[name])
    auts = p.automorphisms()
    assert len(auts) == count
    pts = set(p.lattice_points)
    for M, t in auts:
        assert abs(M[0][0] * M[1][1] - M[0][1] * M[1][0]) == 1
        img = {(M[0][0] * x + M[0][1] * y + t[0], M[1][0] * x + M[1][1] * y + t[1]) for x, y in pts}
        assert img == pts
