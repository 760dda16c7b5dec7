import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cyconekit.errors import NonPositivePairing
from cyconekit.sasaki import (
    FlatToricCone, ReebDeformation, axis_samples, c0_check, c1_constant, deformed_radius,
    difference_field, euler_field, flow_map, inverse_radius, linearized_flow_check,
    pushforward_residual, radius_bounds_check, rotation_field, typeI_deform, typeI_report,
    verify_sasaki_identities,
)

S3 = FlatToricCone(2)
S5 = FlatToricCone(3)


def test_identity_deformation_changes_nothing():
    rng = np.random.default_rng(0)
    d = ReebDeformation((1, 1))
    for x in S3.random_link_points(20, rng):
        s = typeI_deform(S3, d, x)
        E = s.frame
        assert np.allclose(s.eta_t, [S3.eta(x, e) for e in E], atol=1e-14)
        phi = np.array([[np.real(np.vdot(E[k], S3.phi(x, E[j]))) for j in range(3)] for k in range(3)])
        assert np.allclose(s.phi_t, phi, atol=1e-14)
        assert np.allclose(s.g_t, np.eye(3), atol=1e-14)
        assert verify_sasaki_identities(s).max <= 1e-14


def test_reeb_pairing_halves_eta():
    s = typeI_deform(S3, ReebDeformation((2, 1)), np.array([1, 0]))
    assert s.pairing == 2
    E = s.frame
    assert np.allclose(s.eta_t, np.array([S3.eta([1, 0], e) for e in E]) / 2)
    assert s.eta_t[0] == pytest.approx(0.5)


def test_against_symbolic_tensors():
    """Direct sympy evaluation of the deformed tensors on R^4 at x = (1, 1)/sqrt(2)."""
    h = 1 / sp.sqrt(2)
    x = sp.Matrix([h, h, 0, 0])  # (Re z1, Re z2, Im z1, Im z2)

    def J(v):
        return sp.Matrix([-v[2], -v[3], v[0], v[1]])

    def weighted_J(v, w):
        return sp.Matrix([-w[0] * v[2], -w[1] * v[3], w[0] * v[0], w[1] * v[1]])

    xi = J(x)
    xt = weighted_J(x, (2, 1))
    eta = lambda v: xi.dot(v)
    pair = eta(xt)
    assert pair == sp.Rational(3, 2)
    eta_t = lambda v: eta(v) / pair
    phi = lambda v: J(v - eta(v) * xi)
    phi_t = lambda v: phi(v - eta_t(v) * xt)
    g_t = lambda a, b: (a - eta_t(a) * xt).dot(b - eta_t(b) * xt) / pair + eta_t(a) * eta_t(b)

    s = typeI_deform(S3, ReebDeformation((2, 1)), np.array([1, 1]) / np.sqrt(2))
    E = [sp.Matrix([sp.Float(c, 30) for c in np.concatenate([e.real, e.imag])]) for e in s.frame]
    for j, a in enumerate(E):
        assert abs(float(eta_t(a)) - s.eta_t[j]) < 1e-14
        img = phi_t(a)
        for k, b in enumerate(E):
            assert abs(float(b.dot(img)) - s.phi_t[k, j]) < 1e-14
            assert abs(float(g_t(a, b)) - s.g_t[j, k]) < 1e-14
    assert np.allclose(s.xi_t, [float(e.dot(xt)) for e in E], atol=1e-14)


@pytest.mark.parametrize("cone, weights", [(S3, (2, 1)), (S5, (3, 1, 1)), (S3, (1.3, 0.7))])
def test_sasaki_identities(cone, weights):
    rng = np.random.default_rng(11)
    d = ReebDeformation(weights)
    worst = max(verify_sasaki_identities(typeI_deform(cone, d, x)).max
                for x in cone.random_link_points(100, rng))
    assert worst <= 1e-10


def test_non_positive_pairing():
    d = ReebDeformation((1, -3), general=True)
    with pytest.raises(NonPositivePairing):
        typeI_deform(S3, d, np.array([0, 1]))
    with pytest.raises(ValueError):
        ReebDeformation((1, -3))
    with pytest.raises(ValueError):
        typeI_deform(S3, ReebDeformation((1, 1)), np.array([1, 1]))
    with pytest.raises(ValueError):
        typeI_deform(S5, ReebDeformation((1, 1)), np.array([1, 0, 0]))


# ----------------------------------------------------------------- flow map

def test_flow_map_closed_forms():
    x = np.array([0.6, 0.8j])
    assert np.allclose(flow_map(S3, ReebDeformation((1, 1)), 5.0, x), 5.0 * x)
    d = ReebDeformation((2, 1))
    up = flow_map(S3, d, 4.0, [1, 0])
    down = flow_map(S3, d, 4.0, [0, 1])
    assert np.allclose(up, [16, 0]) and np.allclose(down, [0, 4])
    assert deformed_radius(d, 4.0, [1, 0]) == pytest.approx(16.0)
    assert deformed_radius(d, 4.0, [0, 1]) == pytest.approx(4.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 2 ** 32 - 1))
def test_flow_map_integration_agrees(r, seed):
    x = S3.random_link_points(1, np.random.default_rng(seed))[0]
    d = ReebDeformation((2, 1))
    z = flow_map(S3, d, r, x)
    assert np.linalg.norm(z) == pytest.approx(deformed_radius(d, r, x), rel=1e-12)


def test_radius_bounds():
    rng = np.random.default_rng(5)
    d = ReebDeformation((2, 1))
    pts = S3.random_link_points(10 ** 4, rng)
    radii = 10 ** rng.uniform(-3, 3, len(pts))
    samples = list(zip(radii, pts)) + axis_samples(S3, [1e-3, 0.1, 1.0, 4.0, 1e3])
    assert radius_bounds_check(S3, d, samples) <= 1e-9
    # the axis points attain a bound
    axis = radius_bounds_check(S3, d, axis_samples(S3, [4.0]))
    assert abs(axis) <= 1e-12
    assert radius_bounds_check(S3, ReebDeformation((1, 1)), samples[:100]) == 0


def test_c0_estimate():
    rng = np.random.default_rng(9)
    eps = 0.05
    d = ReebDeformation((1 + eps / 2, 1 - eps / 2))
    pts = S3.random_link_points(500, rng)
    samples = list(zip(10 ** rng.uniform(0, 3, len(pts)), pts)) + axis_samples(S3, [1.0, 10.0, 1e3])
    assert c0_check(S3, d, eps, samples) <= 0
    # inverse radius really inverts the flow
    for r, x in samples[:50]:
        z = flow_map(S3, d, r, x, integrate=False)
        assert inverse_radius(d, z) == pytest.approx(r, rel=1e-10)
    assert c1_constant(S3, d, eps, samples[:100]) <= 2
    with pytest.raises(ValueError):
        c0_check(S3, d, eps, [(0.5, pts[0])])


def test_pushforward_of_reeb_field():
    rng = np.random.default_rng(3)
    d = ReebDeformation((2, 1))
    for x in S3.random_link_points(20, rng):
        assert pushforward_residual(d, 3.0 * x) <= 1e-7


# ----------------------------------------------------------- linearized flow

def test_linearized_flow():
    rng = np.random.default_rng(4)
    zero = np.zeros((4, 4))
    samples = [(np.zeros(4), rng.standard_normal(4), t) for t in rng.uniform(0, 1, 20)]
    assert linearized_flow_check(zero, samples) == 0
    e1 = np.array([1.0, 0, 0, 0])
    assert linearized_flow_check(euler_field(2), [(np.zeros(4), e1, t) for t in np.linspace(0, 1, 11)]) <= 1e-6
    rot = rotation_field((2, 1))
    samples = [(np.zeros(4), rng.standard_normal(4), t) for t in rng.uniform(0, 1, 100)]
    assert linearized_flow_check(rot, samples) <= 1e-6
    assert linearized_flow_check(difference_field(ReebDeformation((2, 1))), samples) <= 1e-6


def test_report_is_deterministic():
    a = typeI_report(2, (2, 1), 100, seed=7)
    b = typeI_report(2, (2, 1), 100, seed=7)
    assert a == b
    assert a["identity_residual"] <= 1e-10
    assert a["radius_bound_violation"] <= 1e-9
    assert a["c0_violation"] <= 0
    assert a["linearized_flow_residual"] <= 1e-6
    assert a["flow_crosscheck_max_error"] <= 1e-8
