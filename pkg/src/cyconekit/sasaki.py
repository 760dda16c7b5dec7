"""Type I deformations of Sasaki structures on the flat cone C^n and their flow-map estimates.

Points and tangent vectors are complex arrays of length ``n``; the real
inner product is ``Re <a, b>`` and the complex structure is multiplication
by ``i``.  On the unit sphere ``xi = i z`` and a torus field with weights
``w`` is ``xi~ = i w z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import IntegratorFailure, NonPositivePairing

FRAME_TOL = 1e-8


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


@dataclass(frozen=True)
class FlatToricCone:
    """C^n minus the origin with the round link and the diagonal Reeb field."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("complex dimension must be at least 2")

    def radius(self, z) -> float:
        return float(np.linalg.norm(z))

    def xi(self, z) -> np.ndarray:
        return 1j * np.asarray(z, dtype=complex)

    def eta(self, z, v) -> float:
        return _inner(self.xi(z), v)

    def phi(self, z, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return 1j * (v - self.eta(z, v) * self.xi(z))

    def link_point(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ValueError(f"expected a point of C^{self.n}")
        nz = np.linalg.norm(z)
        if nz == 0:
            raise ValueError("the origin is not on the cone")
        return z / nz

    def random_link_points(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        pts = rng.standard_normal((count, self.n)) + 1j * rng.standard_normal((count, self.n))
        return [p / np.linalg.norm(p) for p in pts]

    def frame(self, x) -> np.ndarray:
        """Orthonormal real frame of ``T_x L`` as rows, ``xi`` first.

        Gram-Schmidt over ``xi, e_1, i e_1, ..., e_n, i e_n`` after removing
        the radial direction; near-dependent candidates are skipped.
        """
        x = np.asarray(x, dtype=complex)
        basis = [x]
        rows: list[np.ndarray] = []
        cands = [self.xi(x)]
        for k in range(self.n):
            e = np.zeros(self.n, dtype=complex)
            e[k] = 1
            cands += [e, 1j * e]
        for c in cands:
            v = c.copy()
            for _ in range(2):
                for b in basis + rows:
                    v = v - _inner(b, v) / _inner(b, b) * b
            nv = np.linalg.norm(v)
            if nv > FRAME_TOL:
                rows.append(v / nv)
            if len(rows) == 2 * self.n - 1:
                break
        return np.array(rows)


@dataclass(frozen=True)
class ReebDeformation:
    """A torus field ``sum w_k d/dtheta_k``; weights must be positive unless ``general``."""

    weights: tuple[float, ...]
    general: bool = False

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not self.general and min(w) <= 0:
            raise ValueError("weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def lambda1(self) -> float:
        return min(self.weights)

    @property
    def lambda2(self) -> float:
        return max(self.weights)

    def field(self, z) -> np.ndarray:
        return 1j * np.asarray(self.weights) * np.asarray(z, dtype=complex)

    def pairing(self, x) -> float:
        """``eta(xi~)`` at ``x``, i.e. ``sum w_k |x_k|^2``."""
        return float(np.sum(np.asarray(self.weights) * np.abs(np.asarray(x)) ** 2))


def _check_dim(cone: FlatToricCone, d: ReebDeformation):
    if len(d.weights) != cone.n:
        raise ValueError(f"{len(d.weights)} weights for complex dimension {cone.n}")


@dataclass(frozen=True)
class SasakiSample:
    """Deformed tensors at a link point, in the coordinates of ``frame``.

    ``eta_t[j] = eta~(E_j)``, ``phi_t[:, j]`` are the frame coordinates of
    ``Phi~(E_j)``, ``g_t[j, k] = g~(E_j, E_k)`` and ``xi_t`` holds ``xi~``.
    """

    x: np.ndarray
    frame: np.ndarray
    xi_t: np.ndarray
    eta_t: np.ndarray
    phi_t: np.ndarray
    g_t: np.ndarray
    pairing: float


def typeI_deform(cone: FlatToricCone, d: ReebDeformation, x) -> SasakiSample:
    _check_dim(cone, d)
    x = np.asarray(x, dtype=complex)
    if abs(np.linalg.norm(x) - 1) > 1e-12:
        raise ValueError("x must be a unit vector")
    pair = d.pairing(x)
    if pair <= 0:
        raise NonPositivePairing(f"eta(xi~) = {pair} at x")
    E = cone.frame(x)
    xt = d.field(x)

    def coords(v):
        return np.array([_inner(e, v) for e in E])

    eta_t = np.array([cone.eta(x, e) for e in E]) / pair
    ys = [e - eta_t[j] * xt for j, e in enumerate(E)]
    phi_t = np.column_stack([coords(cone.phi(x, y)) for y in ys])
    m = len(E)
    g_t = np.empty((m, m))
    for j in range(m):
        for k in range(m):
            g_t[j, k] = _inner(ys[j], ys[k]) / pair + eta_t[j] * eta_t[k]
    return SasakiSample(x, E, coords(xt), eta_t, phi_t, g_t, pair)


@dataclass(frozen=True)
class IdentityResiduals:
    reeb_normalization: float  # eta~(xi~) - 1
    phi_kills_reeb: float      # Phi~(xi~)
    phi_squared: float         # Phi~^2 + Id - eta~ (x) xi~
    metric_compatible: float   # g~(Phi~X, Phi~Y) - g~(X,Y) + eta~(X)eta~(Y)
    contact_form: float        # g~(xi~, X) - eta~(X)

    @property
    def max(self) -> float:
        return max(self.reeb_normalization, self.phi_kills_reeb, self.phi_squared,
                   self.metric_compatible, self.contact_form)


def verify_sasaki_identities(s: SasakiSample) -> IdentityResiduals:
    """Max-entry residuals of the algebraic Sasaki identities in the stored frame."""
    m = len(s.eta_t)
    P, G, e, xt = s.phi_t, s.g_t, s.eta_t, s.xi_t
    r1 = abs(e @ xt - 1)
    r2 = np.max(np.abs(P @ xt))
    r3 = np.max(np.abs(P @ P + np.eye(m) - np.outer(xt, e)))
    r4 = np.max(np.abs(P.T @ G @ P - G + np.outer(e, e)))
    r5 = np.max(np.abs(xt @ G - e))
    return IdentityResiduals(float(r1), float(r2), float(r3), float(r4), float(r5))


# ------------------------------------------------------------------ flow map

def _integrate(d: ReebDeformation, t: float, x: np.ndarray) -> np.ndarray:
    w = np.asarray(d.weights)
    n = len(w)
    y0 = np.concatenate([x.real, x.imag])

    def rhs(_, y):
        return np.concatenate([w * y[:n], w * y[n:]])

    sol = solve_ivp(rhs, (0.0, t), y0, method="RK45", rtol=1e-10, atol=1e-12 * max(1.0, np.abs(y0).max()))
    if not sol.success:
        raise IntegratorFailure(sol.message)
    y = sol.y[:, -1]
    return y[:n] + 1j * y[n:]


def flow_map(cone: FlatToricCone, d: ReebDeformation, r: float, x, integrate: bool = True,
             rtol: float = 1e-8) -> np.ndarray:
    """``Psi(r, x)``: the time ``log r`` flow of ``-J xi~`` from ``x``, i.e. ``r**w_k * x_k``.

    With ``integrate`` the closed form is cross-checked against an adaptive
    Runge-Kutta solve; disagreement beyond ``rtol`` raises IntegratorFailure.
    """
    _check_dim(cone, d)
    if r <= 0:
        raise ValueError("r must be positive")
    x = np.asarray(x, dtype=complex)
    w = np.asarray(d.weights)
    closed = r ** w * x
    if integrate:
        num = _integrate(d, float(np.log(r)), x)
        scale = max(np.linalg.norm(closed), 1e-300)
        if np.linalg.norm(num - closed) > rtol * scale:
            raise IntegratorFailure(
                f"integrated flow differs from closed form by {np.linalg.norm(num - closed) / scale:.3e}")
    return closed


def _psi(d: ReebDeformation, z: np.ndarray) -> np.ndarray:
    """``Psi`` in ambient coordinates: ``z_k |z|**(w_k - 1)``."""
    return np.linalg.norm(z) ** (np.asarray(d.weights) - 1) * z


def deformed_radius(d: ReebDeformation, r: float, x) -> float:
    """``|Psi(r, x)|``, computed as ``r**lambda1 * (sum |x_k|^2 r^(2(w_k - lambda1)))^(1/2)`` over ``|x|``."""
    x = np.asarray(x, dtype=complex)
    w = np.asarray(d.weights)
    a2 = np.abs(x) ** 2
    ratio = np.sqrt(np.sum(a2 * r ** (2 * (w - d.lambda1)))) / np.sqrt(np.sum(a2))
    return float(r ** d.lambda1 * ratio)


def radius_bounds_check(cone: FlatToricCone, d: ReebDeformation,
                        samples: Iterable[tuple[float, np.ndarray]]) -> float:
    """Largest signed relative violation of ``min(r^l1, r^l2) <= |Psi| <= max(r^l1, r^l2)``.

    Non-positive means every sample lies within the bounds.
    """
    _check_dim(cone, d)
    worst = -np.inf
    for r, x in samples:
        if not 1e-3 <= r <= 1e3:
            raise ValueError("sample radii must lie in [1e-3, 1e3]")
        a, b = r ** d.lambda1, r ** d.lambda2
        lo, hi = min(a, b), max(a, b)
        rho = deformed_radius(d, r, x)
        worst = max(worst, (lo - rho) / lo, (rho - hi) / hi)
    return float(worst)


def axis_samples(cone: FlatToricCone, radii: Sequence[float]) -> list[tuple[float, np.ndarray]]:
    """Samples on the coordinate axes, where one of the radius bounds is attained."""
    out = []
    for r in radii:
        for k in range(cone.n):
            e = np.zeros(cone.n, dtype=complex)
            e[k] = 1
            out.append((r, e))
    return out


def inverse_radius(d: ReebDeformation, z) -> float:
    """``r~' = r o Psi^{-1}`` at ``z``: the root of ``sum |z_k|^2 rho^(-2 w_k) = 1``."""
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    w = np.asarray(d.weights)

    def f(s):
        return np.log(np.sum(a2 * np.exp(-2 * w * s)))

    r = np.linalg.norm(z)
    lo, hi = np.log(r) / d.lambda2, np.log(r) / d.lambda1
    lo, hi = min(lo, hi) - 1e-9, max(lo, hi) + 1e-9
    return float(np.exp(brentq(f, lo, hi, xtol=1e-15, rtol=1e-14)))


def c0_check(cone: FlatToricCone, d: ReebDeformation, eps: float,
             samples: Iterable[tuple[float, np.ndarray]]) -> float:
    """Largest signed relative violation of ``r^(1-eps) <= r~' <= r^(1+eps)`` for ``r >= 1``."""
    _check_dim(cone, d)
    worst = -np.inf
    for r, x in samples:
        if r < 1:
            raise ValueError("the estimate is stated on r >= 1")
        rt = inverse_radius(d, r * np.asarray(x, dtype=complex))
        lo, hi = r ** (1 - eps), r ** (1 + eps)
        worst = max(worst, (lo - rt) / lo, (rt - hi) / hi)
    return float(worst)


def _real(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _complex(y: np.ndarray) -> np.ndarray:
    n = len(y) // 2
    return y[:n] + 1j * y[n:]


def differential(d: ReebDeformation, z, h: float = 1e-6) -> np.ndarray:
    """Real ``2n x 2n`` Jacobian of ``Psi`` at ``z`` by central differences (step ``h |z|``)."""
    z = np.asarray(z, dtype=complex)
    y = _real(z)
    step = h * np.linalg.norm(z)
    cols = []
    for k in range(len(y)):
        e = np.zeros_like(y)
        e[k] = step
        cols.append((_real(_psi(d, _complex(y + e))) - _real(_psi(d, _complex(y - e)))) / (2 * step))
    return np.column_stack(cols)


def c1_constant(cone: FlatToricCone, d: ReebDeformation, eps: float,
                samples: Iterable[tuple[float, np.ndarray]]) -> float:
    """Smallest ``C`` with ``r^-eps / C <= |Psi_* v| / |v| <= C r^eps`` over the samples."""
    _check_dim(cone, d)
    const = 0.0
    for r, x in samples:
        sv = np.linalg.svd(differential(d, r * np.asarray(x, dtype=complex)), compute_uv=False)
        const = max(const, sv.max() / r ** eps, r ** -eps / sv.min())
    return float(const)


def pushforward_residual(d: ReebDeformation, z, h: float = 1e-6) -> float:
    """Relative mismatch between ``Psi_* xi~(z)`` and ``xi~(Psi(z))``."""
    z = np.asarray(z, dtype=complex)
    push = _complex(differential(d, z, h) @ _real(d.field(z)))
    target = d.field(_psi(d, z))
    return float(np.linalg.norm(push - target) / np.linalg.norm(target))


# ------------------------------------------------------- linearized flow

def euler_field(n: int) -> np.ndarray:
    """``r d/dr`` as a real linear field on ``R^(2n)`` (coordinates ``Re z, Im z``)."""
    return np.eye(2 * n)


def rotation_field(weights: Sequence[float]) -> np.ndarray:
    """The torus field ``i w z`` as a real matrix."""
    w = np.diag(np.asarray(weights, dtype=float))
    z = np.zeros_like(w)
    return np.block([[z, -w], [w, z]])


def difference_field(d: ReebDeformation) -> np.ndarray:
    """``-J xi~ + J xi``, i.e. ``z -> (w - 1) z``."""
    w = np.asarray(d.weights) - 1
    return np.diag(np.concatenate([w, w]))


def linearized_flow_check(M: np.ndarray, samples: Iterable[tuple[np.ndarray, np.ndarray, float]],
                          h: float = 1e-5) -> float:
    """Max over ``(p, w, t)`` of ``|d/dt (Phi^t_* w) - (grad X)(Phi^t_* w)|`` for ``X(p) = M p``.

    ``Phi^t_* w = exp(tM) w`` and, for the flat connection, ``grad X = M``;
    the time derivative is a second-order central difference.
    """
    M = np.asarray(M, dtype=float)
    worst = 0.0
    for _p, w, t in samples:
        w = np.asarray(w, dtype=float)
        fd = (expm((t + h) * M) @ w - expm((t - h) * M) @ w) / (2 * h)
        worst = max(worst, float(np.linalg.norm(fd - M @ (expm(t * M) @ w))))
    return worst


# ------------------------------------------------------------------ suite

def typeI_report(n: int, weights: Sequence[float], samples: int, seed: int = 0,
                 eps: float = 0.05) -> dict:
    """Residual maxima of every check on ``samples`` random link points."""
    cone = FlatToricCone(n)
    d = ReebDeformation(tuple(weights))
    rng = np.random.default_rng(seed)
    pts = cone.random_link_points(samples, rng)
    ident = [verify_sasaki_identities(typeI_deform(cone, d, x)) for x in pts]
    radii = 10 ** rng.uniform(-3, 3, samples)
    radial = list(zip(radii, pts)) + axis_samples(cone, [1e-3, 0.5, 1.0, 4.0, 1e3])
    flow_err = 0.0
    for r, x in radial[:20]:
        closed = flow_map(cone, d, r, x, integrate=False)
        num = _integrate(d, float(np.log(r)), x)
        flow_err = max(flow_err, float(np.linalg.norm(num - closed) / np.linalg.norm(closed)))
    # small perturbation toward the round weights for the C^0/C^1 estimates
    dev = max(abs(w - 1) for w in d.weights) or 1.0
    small = ReebDeformation(tuple(1 + (w - 1) * (eps / 2) / dev for w in d.weights))
    big = [(r, x) for r, x in zip(10 ** rng.uniform(0, 3, samples), pts)]
    M = difference_field(d)
    lin = [(np.zeros(2 * n), rng.standard_normal(2 * n), t) for t in rng.uniform(0, 1, samples)]
    return {
        "weights": list(d.weights),
        "samples": samples,
        "seed": seed,
        "identity_residual": max(r.max for r in ident),
        "radius_bound_violation": max(0.0, radius_bounds_check(cone, d, radial)),
        "flow_crosscheck_max_error": flow_err,
        "pushforward_residual": max(pushforward_residual(d, r * x) for r, x in radial[:samples]),
        "c0_violation": max(0.0, c0_check(cone, small, eps, big)),
        "c1_constant": c1_constant(cone, small, eps, big),
        "linearized_flow_residual": linearized_flow_check(M, lin),
        "eps": eps,
    }
