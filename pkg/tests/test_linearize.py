import random

import numpy as np
import pytest
import sympy as sp

from cyconekit.errors import (
    InfiniteOrder, JetOverflow, NotAGroup, NotEquivariant, NotHyperplanePreserving, ParseError,
)
from cyconekit.linearize import (
    CyclicRep, PolyGerm, abt_cocycle_check, average_jet, block_diagonalize, cyclic_group,
    exact_order, finite_order_obstruction, is_block_diagonal, parse_gaussian, parse_map,
    parse_matrix, root_of_unity, to_fraction_pair,
)

from conftest import DATA

I = sp.I
ZETA3 = sp.Rational(-1, 2) + sp.sqrt(3) / 2 * I
z1, z2 = sp.symbols("z1 z2")


def read(name):
    return (DATA / "linearize" / name).read_text()


def averaged_form(B, m):
    H = sp.zeros(B.rows, B.cols)
    P = sp.eye(B.rows)
    for _ in range(m):
        H += P.H * P
        P = (P * B).applyfunc(sp.expand)
    return H.applyfunc(sp.expand)


# ---------------------------------------------------------------- parsing

def test_parse_gaussian():
    assert parse_gaussian("1/2 - 3i") == sp.Rational(1, 2) - 3 * I
    assert parse_gaussian("-j") == -I
    assert parse_gaussian(" 2 ") == 2
    for bad in ["", "x", "sqrt(2)", "1 +* i"]:
        with pytest.raises(ParseError):
            parse_gaussian(bad)


def test_parse_matrix_and_map():
    assert parse_matrix(read("order4.txt")) == sp.Matrix([[I, 1], [0, -I]])
    with pytest.raises(ParseError):
        parse_matrix("1, 2\n3")
    g = parse_map(read("involution.txt"))
    assert g.components == (-z1 + z2 ** 2, -z2)
    with pytest.raises(ParseError):
        parse_map("z1 + w\nz2")
    with pytest.raises(ParseError):
        parse_map("")
    with pytest.raises(ValueError):
        parse_map("z1 + 1\nz2")


def test_orders_and_roots_of_unity():
    assert exact_order(sp.Matrix([[I, 1], [0, -I]])) == 4
    assert exact_order(sp.Matrix([[1, 1], [0, 1]])) is None
    assert root_of_unity(ZETA3) == (1, 3)
    assert root_of_unity(-I) == (3, 4)
    assert to_fraction_pair(sp.Rational(1, 2) - I) is not None
    assert to_fraction_pair(sp.sqrt(2)) is None


# ------------------------------------------------------ block diagonalization

def test_order_four_example():
    rep = CyclicRep.from_matrix(parse_matrix(read("order4.txt")))
    assert rep.order == 4
    bd = block_diagonalize(rep)
    assert bd.R == sp.Matrix([[1, -I / 2], [0, 1]])
    assert bd.conjugated == sp.diag(I, -I)
    assert not bd.unitarized
    # by hand: the corner of R A R^{-1} is 1 - 2i r
    assert sp.simplify(bd.R[0, 1] - 1 / (2 * I)) == 0
    assert (bd.R * rep.matrix * bd.R.inv()).applyfunc(sp.simplify) == bd.conjugated


def test_already_block_diagonal():
    bd = block_diagonalize(CyclicRep.from_matrix(sp.diag(I, -1, 1)))
    assert bd.R == sp.eye(3) and bd.conjugated == sp.diag(I, -1, 1)


def test_cube_roots_recovered():
    R0 = sp.Matrix([[1, 2, 3], [0, 1, -1], [0, 0, 1]])
    A = (R0 * sp.diag(ZETA3, ZETA3, 1) * R0.inv()).applyfunc(sp.expand)
    bd = block_diagonalize(CyclicRep.from_matrix(A))
    assert bd.conjugated.applyfunc(sp.simplify) == sp.diag(ZETA3, ZETA3, 1).applyfunc(sp.simplify)


def random_case(rng: random.Random):
    n = rng.choice([2, 3, 4])
    eig = [rng.choice([1, -1, I, -I]) for _ in range(n)]
    while True:
        P = sp.Matrix(n - 1, n - 1, lambda i, j: rng.randint(-2, 2) + rng.randint(-1, 1) * I)
        if P.det() != 0:
            break
    R0 = sp.eye(n)
    R0[: n - 1, : n - 1] = P
    for i in range(n - 1):
        R0[i, n - 1] = sp.Rational(rng.randint(-3, 3), rng.randint(1, 3)) + rng.randint(-2, 2) * I
    A = (R0 * sp.diag(*eig) * R0.inv()).applyfunc(sp.expand)
    return A, eig


def test_randomized_round_trip():
    rng = random.Random(1729)
    unitarized = 0
    for _ in range(100):
        A, eig = random_case(rng)
        n = A.rows
        rep = CyclicRep.from_matrix(A)
        assert rep.order in (1, 2, 4)
        bd = block_diagonalize(rep)
        R, C = bd.R, bd.conjugated
        assert all(R[n - 1, j] == 0 for j in range(n - 1))
        assert (R * A - C * R).applyfunc(sp.expand) == sp.zeros(n, n)
        assert is_block_diagonal(C)
        assert C[n - 1, n - 1] == eig[-1]
        blk = C[: n - 1, : n - 1]
        if bd.unitarized:
            unitarized += 1
            # the upper block of R is Q^{-1}; Q diagonalizes the averaged form
            Q = R[: n - 1, : n - 1].inv()
            D = (Q.H * averaged_form(A[: n - 1, : n - 1], rep.order) * Q).applyfunc(sp.expand)
            assert D.is_diagonal()
            assert (blk.H * D * blk - D).applyfunc(sp.expand) == sp.zeros(n - 1, n - 1)
        else:
            assert blk.is_diagonal()
        assert sorted(map(str, blk.eigenvals(multiple=True))) == sorted(map(str, eig[:-1]))
    assert unitarized > 0


def test_float_path():
    R0 = sp.Matrix([[1, 2, 3], [1, 1, -1], [0, 0, 2]])
    A = (R0 * sp.diag(I, -1, 1) * R0.inv()).applyfunc(sp.expand)
    An = np.array(A.evalf(), dtype=complex)
    rep = CyclicRep.from_matrix(An)
    assert rep.order == 4 and not rep.exact
    bd = block_diagonalize(rep)
    assert is_block_diagonal(bd.conjugated)
    assert np.allclose(bd.R @ An @ np.linalg.inv(bd.R), bd.conjugated)
    ev = np.linalg.eigvals(bd.conjugated[:2, :2])
    assert all(np.min(np.abs(ev - e)) < 1e-9 for e in (1j, -1))


def test_rep_errors():
    with pytest.raises(NotHyperplanePreserving):
        CyclicRep.from_matrix(sp.Matrix([[1, 0], [1, 1]]))
    with pytest.raises(InfiniteOrder):
        CyclicRep.from_matrix(parse_matrix(read("shear.txt")))
    with pytest.raises(InfiniteOrder):
        CyclicRep.from_matrix(sp.diag(I, 1), order=2)
    with pytest.raises(ValueError):
        CyclicRep.from_matrix(sp.Matrix([[1]]))


# ------------------------------------------------------------ obstruction

def test_shear_growth():
    [g] = finite_order_obstruction(parse_matrix(read("shear.txt")))
    assert g.magnitudes == tuple(range(1, 11)) and g.slope == 1 and g.linear


def test_finite_order_has_no_obstruction():
    assert finite_order_obstruction(sp.diag(I, -I)) == []


def test_cube_root_shear_growth():
    [g] = finite_order_obstruction(sp.Matrix([[ZETA3, 2], [0, ZETA3]]), kmax=6)
    assert g.slope == 2 and g.magnitudes == (2, 4, 6, 8, 10, 12) and g.linear


def test_obstruction_float_and_errors():
    [g] = finite_order_obstruction(np.array([[1, 3], [0, 1]], dtype=complex), kmax=4)
    assert np.allclose(g.magnitudes, [3, 6, 9, 12]) and g.linear
    with pytest.raises(ValueError):
        finite_order_obstruction(sp.Matrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))


# ------------------------------------------------------------------- jets

def test_averaging_involution():
    g = parse_map(read("involution.txt"))
    G = cyclic_group(g, 2)
    assert len(G) == 2
    sigma = average_jet(G, 2)
    assert sigma.components == (z1 - z2 ** 2 / 2, z2)
    # oracle: sigma o gamma = d gamma o sigma by direct substitution
    lhs = [sp.expand(c.subs({z1: -z1 + z2 ** 2, z2: -z2}, simultaneous=True)) for c in sigma.components]
    rhs = [sp.expand(x) for x in sp.Matrix([[-1, 0], [0, -1]]) * sp.Matrix(sigma.components)]
    assert lhs == rhs


def test_linear_group_averages_to_identity():
    g = PolyGerm.linear(sp.Matrix([[0, -1], [1, 0]]), (z1, z2))
    sigma = average_jet(cyclic_group(g, 3), 3)
    assert sigma.components == (z1, z2)


def test_trivial_group():
    ident = PolyGerm((z1, z2), (z1, z2))
    assert average_jet([ident], 4).components == (z1, z2)


def test_jet_errors():
    g = parse_map(read("involution.txt"))
    with pytest.raises(JetOverflow):
        average_jet(cyclic_group(g, 2), 13)
    with pytest.raises(NotAGroup):
        average_jet([PolyGerm((z1, z2), (-z1, -z2))], 2)
    with pytest.raises(NotAGroup):
        cyclic_group(PolyGerm((z1, z2), (2 * z1, z2)), 2, max_order=8)


# ---------------------------------------------------------------- cocycle

def test_identity_map_cocycle():
    F = PolyGerm((z1, z2), (z1, z2))
    rep = abt_cocycle_check(F, sp.diag(-1, I), sp.diag(-1, I))
    assert rep.residual == 0


def test_equivariant_diagonal_cocycle():
    F = parse_map(read("F_equiv.txt"))
    g = parse_matrix(read("g_equiv.txt"))
    assert g[0, 0] == g[1, 1] ** 2
    rep = abt_cocycle_check(F, g, g)
    assert rep.residual == 0 and rep.block_diagonal


def test_non_diagonal_counterexample():
    F = parse_map(read("F_counter.txt"))
    rep = abt_cocycle_check(F, parse_matrix(read("gA_counter.txt")), parse_matrix(read("gB_counter.txt")))
    assert rep.residual == 2 and not rep.block_diagonal


def test_cocycle_requires_equivariance():
    F = parse_map(read("F_equiv.txt"))
    with pytest.raises(NotEquivariant):
        abt_cocycle_check(F, sp.diag(1, -1), sp.diag(1, I))
    with pytest.raises(ValueError):
        abt_cocycle_check(F, sp.eye(3), sp.eye(3))
