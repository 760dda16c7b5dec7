"""Linearizing finite cyclic automorphism groups that preserve a hyperplane.

Exact inputs (Gaussian rationals, or any algebraic numbers sympy can place in
a number field) are handled with domain matrices over that field; numeric
inputs use complex floats with a ``1e-12`` tolerance.  The preserved
hyperplane is always ``z_n = 0``, so the last row of every matrix must be
``(0, ..., 0, d)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy
from sympy.polys.constructor import construct_domain
from sympy.polys.matrices import DomainMatrix

from .errors import (
    InfiniteOrder,
    JetOverflow,
    NotAGroup,
    NotEquivariant,
    NotHyperplanePreserving,
    ParseError,
)

MAX_ORDER = 1000
MAX_JET = 12
DEFAULT_JET = 4
FLOAT_TOL = 1e-12


# ------------------------------------------------------------------ parsing

_GAUSS = re.compile(r"^[0-9./+\-\s*ij()]*$")


def parse_gaussian(text: str) -> sympy.Expr:
    """``a+bi``-style Gaussian rational (``i`` or ``j`` as the imaginary unit)."""
    s = text.strip().replace("j", "i")
    if not s or not _GAUSS.match(s):
        raise ParseError(f"not a Gaussian rational: {text!r}")
    s = re.sub(r"([0-9)])\s*i", r"\1*i", s).replace("i", "I")
    try:
        val = sympy.sympify(s, rational=True)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ParseError(f"not a Gaussian rational: {text!r}") from exc
    re_, im = val.as_real_imag()
    if not (re_.is_Rational and im.is_Rational):
        raise ParseError(f"not a Gaussian rational: {text!r}")
    return sympy.nsimplify(val)


def parse_matrix(text: str) -> sympy.Matrix:
    """Rows of comma-separated Gaussian rationals; blank lines and ``#`` comments skipped."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([parse_gaussian(x) for x in line.split(",")])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix must be square and non-empty")
    return sympy.Matrix(rows)


def parse_map(text: str) -> "PolyGerm":
    """One polynomial component per line in ``z1, ..., zn`` (``^`` allowed, ``I`` or ``i`` for sqrt(-1))."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    n = len(lines)
    if n == 0:
        raise ParseError("empty map")
    zs = sympy.symbols(f"z1:{n + 1}")
    local = {str(z): z for z in zs}
    local.update(I=sympy.I, i=sympy.I)
    comps = []
    for ln in lines:
        if not re.fullmatch(r"[0-9a-zA-Z_./+\-*^()\s]*", ln):
            raise ParseError(f"unexpected characters in {ln!r}")
        try:
            e = sympy.parse_expr(ln.replace("^", "**"), local_dict=local, global_dict={"Integer": sympy.Integer,
                                 "Rational": sympy.Rational, "Symbol": sympy.Symbol, "Float": sympy.Float})
        except Exception as exc:
            raise ParseError(f"cannot parse {ln!r}") from exc
        if not e.free_symbols <= set(zs):
            raise ParseError(f"unknown symbols in {ln!r}")
        comps.append(sympy.nsimplify(sympy.expand(e), rational=True))
    return PolyGerm(tuple(zs), tuple(comps))


# ----------------------------------------------------------- exact matrices

def _is_exact(M: sympy.Matrix) -> bool:
    return all(not x.has(sympy.Float) for x in M)


def _common(*mats: sympy.Matrix) -> list[DomainMatrix]:
    """Place every matrix over one number field."""
    entries = [x for M in mats for x in M]
    K, els = construct_domain(entries, extension=True, field=True)
    out, pos = [], 0
    for M in mats:
        r, c = M.shape
        rows = [els[pos + i * c: pos + (i + 1) * c] for i in range(r)]
        out.append(DomainMatrix(rows, (r, c), K))
        pos += r * c
    return out


def _is_identity(dm: DomainMatrix) -> bool:
    return dm.to_sparse() == DomainMatrix.eye(dm.shape[0], dm.domain).to_sparse()


def _clean(M: sympy.Matrix) -> sympy.Matrix:
    return M.applyfunc(lambda x: sympy.nsimplify(sympy.expand(x)))


def exact_order(M: sympy.Matrix, max_order: int = MAX_ORDER) -> int | None:
    (dm,) = _common(M)
    p = dm
    for k in range(1, max_order + 1):
        if _is_identity(p):
            return k
        p = p * dm
    return None


def float_order(M: np.ndarray, max_order: int = MAX_ORDER, tol: float = FLOAT_TOL) -> int | None:
    M = np.asarray(M, dtype=complex)
    eye = np.eye(len(M))
    p = M.copy()
    for k in range(1, max_order + 1):
        if np.max(np.abs(p - eye)) <= tol * max(1.0, np.max(np.abs(p))):
            return k
        p = p @ M
    return None


def root_of_unity(x, max_order: int = MAX_ORDER) -> tuple[int, int]:
    """``(k, m)`` with ``x = exp(2 pi i k / m)`` and ``m`` minimal; exact for sympy input."""
    if isinstance(x, sympy.Basic) and not x.has(sympy.Float):
        m = exact_order(sympy.Matrix([[x]]), max_order)
    else:
        m = float_order(np.array([[complex(x)]]), max_order)
    if m is None:
        raise InfiniteOrder(f"{x} is not a root of unity of order <= {max_order}")
    ang = float(sympy.arg(sympy.N(x, 30))) if isinstance(x, sympy.Basic) else float(np.angle(complex(x)))
    return round(ang * m / (2 * np.pi)) % m, m


# ------------------------------------------------------------------ reps

@dataclass(frozen=True)
class CyclicRep:
    """Generator of a finite cyclic group preserving ``z_n = 0``, with its order."""

    matrix: object  # sympy.Matrix (exact) or numpy complex array
    order: int

    @property
    def exact(self) -> bool:
        return isinstance(self.matrix, sympy.MatrixBase)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def block(self):
        return self.matrix[: self.n - 1, : self.n - 1]

    @property
    def c(self):
        return self.matrix[: self.n - 1, self.n - 1]

    @property
    def d(self):
        return self.matrix[self.n - 1, self.n - 1]

    @classmethod
    def from_matrix(cls, A, order: int | None = None, max_order: int = MAX_ORDER) -> "CyclicRep":
        exact = isinstance(A, sympy.MatrixBase) and _is_exact(A)
        if not exact:
            A = np.asarray(A, dtype=complex)
        n = A.shape[0]
        if A.shape != (n, n) or n < 2:
            raise ValueError("need a square matrix of size at least 2")
        last = [A[n - 1, j] for j in range(n - 1)]
        if exact:
            if any(sympy.simplify(x) != 0 for x in last):
                raise NotHyperplanePreserving("last row must be (0, ..., 0, d)")
        elif max(abs(x) for x in last) > FLOAT_TOL:
            raise NotHyperplanePreserving("last row must be (0, ..., 0, d)")
        m = exact_order(A, max_order) if exact else float_order(A, max_order)
        if m is None:
            raise InfiniteOrder(f"no A^m = Id with m <= {max_order}")
        if order is not None and order % m:
            raise InfiniteOrder(f"A^{order} != Id (the order is {m})")
        return cls(A, m)


def _solve_consistent(M: DomainMatrix, b: DomainMatrix) -> DomainMatrix | None:
    """A solution of ``M x = b`` (free variables zero) or None if inconsistent."""
    n = M.shape[1]
    aug = M.hstack(b)
    rref, pivots = aug.rref()
    if n in pivots:
        return None
    K = M.domain
    x = [K.zero] * n
    rows = rref.to_list()
    for i, p in enumerate(pivots):
        x[p] = rows[i][n]
    return DomainMatrix([[v] for v in x], (n, 1), K)


def _hermitian_gram_schmidt(B: sympy.Matrix, m: int) -> sympy.Matrix:
    """Columns orthogonal for the ``B``-averaged Hermitian form ``H = sum (B^k)^* B^k``.

    Returns ``Q`` with ``Q^* H Q`` diagonal and ``Q`` unit upper triangular, so
    ``Q^{-1} B Q`` is unitary up to that diagonal scaling.
    """
    k = B.shape[0]
    H = sympy.zeros(k, k)
    P = sympy.eye(k)
    for _ in range(m):
        H += P.H * P
        P = _clean(P * B)
    H = _clean(H)
    cols: list[sympy.Matrix] = []
    for j in range(k):
        v = sympy.eye(k)[:, j]
        for u in cols:
            coef = (u.H * H * sympy.eye(k)[:, j])[0] / (u.H * H * u)[0]
            v = v - coef * u
        cols.append(_clean(v))
    return sympy.Matrix.hstack(*cols)


def _is_diagonal_exact(M: sympy.Matrix) -> bool:
    return all(sympy.simplify(M[i, j]) == 0 for i in range(M.rows) for j in range(M.cols) if i != j)


@dataclass(frozen=True)
class BlockDiagonalization:
    R: object
    conjugated: object  # R A R^{-1}
    unitarized: bool


def block_diagonalize(rep: CyclicRep) -> BlockDiagonalization:
    """``R`` preserving ``z_n = 0`` with ``R A R^{-1}`` block diagonal.

    For a diagonal upper-left block ``R`` is unit upper triangular with last
    column ``r`` solving ``(lambda_i - d) r_i = c_i``.  Otherwise the block is
    first conjugated by a Gram-Schmidt basis of its averaged Hermitian form,
    and the last column solves ``(B' - d) r = c'``.
    """
    if not rep.exact:
        return _block_diagonalize_float(rep)
    A = rep.matrix
    n = rep.n
    B = A[: n - 1, : n - 1]
    unitarize = not _is_diagonal_exact(B)
    S = sympy.eye(n)
    if unitarize:
        Q = _hermitian_gram_schmidt(B, rep.order)
        S[: n - 1, : n - 1] = Q.inv()
    S = _clean(S)
    dA, dS = _common(A, S)
    K = dA.domain
    A1 = dS * dA * dS.inv()
    blk = A1.extract(list(range(n - 1)), list(range(n - 1)))
    c = A1.extract(list(range(n - 1)), [n - 1])
    d = A1.extract([n - 1], [n - 1]).to_list()[0][0]
    lhs = blk - DomainMatrix.eye(n - 1, K) * d
    r = _solve_consistent(lhs, c)
    if r is None:
        raise InfiniteOrder("c has a component along an eigenvalue equal to d")
    rows = DomainMatrix.eye(n, K).to_list()
    for i, (ri,) in enumerate(r.to_list()):
        rows[i][n - 1] = ri
    dT = DomainMatrix(rows, (n, n), K)
    R = dT * dS
    conj = R * dA * R.inv()
    out = conj.to_Matrix()
    for i in range(n - 1):
        if out[i, n - 1] != 0:
            raise ArithmeticError("conjugation left a nonzero off-diagonal block")
    return BlockDiagonalization(_clean(R.to_Matrix()), _clean(out), unitarize)


def _block_diagonalize_float(rep: CyclicRep) -> BlockDiagonalization:
    A = np.asarray(rep.matrix, dtype=complex)
    n = rep.n
    B = A[: n - 1, : n - 1]
    off = B - np.diag(np.diag(B))
    unitarize = bool(np.max(np.abs(off), initial=0) > FLOAT_TOL)
    S = np.eye(n, dtype=complex)
    if unitarize:
        H = np.zeros_like(B)
        P = np.eye(n - 1, dtype=complex)
        for _ in range(rep.order):
            H += P.conj().T @ P
            P = P @ B
        L = np.linalg.cholesky(H)
        S[: n - 1, : n - 1] = L.conj().T
    A1 = S @ A @ np.linalg.inv(S)
    blk, c, d = A1[: n - 1, : n - 1], A1[: n - 1, n - 1], A1[n - 1, n - 1]
    lhs = blk - d * np.eye(n - 1)
    r, *_ = np.linalg.lstsq(lhs, c, rcond=None)
    if np.max(np.abs(lhs @ r - c)) > 1e-10 * max(1.0, np.max(np.abs(c))):
        raise InfiniteOrder("c has a component along an eigenvalue equal to d")
    T = np.eye(n, dtype=complex)
    T[: n - 1, n - 1] = r
    R = T @ S
    return BlockDiagonalization(R, R @ A @ np.linalg.inv(R), unitarize)


def is_block_diagonal(M, tol: float = 1e-10) -> bool:
    n = M.shape[0]
    if isinstance(M, sympy.MatrixBase):
        return all(sympy.simplify(M[i, n - 1]) == 0 and sympy.simplify(M[n - 1, i]) == 0 for i in range(n - 1))
    M = np.asarray(M)
    return bool(max(np.max(np.abs(M[: n - 1, n - 1])), np.max(np.abs(M[n - 1, : n - 1]))) <= tol)


# ------------------------------------------------------------- obstruction

@dataclass(frozen=True)
class Growth:
    """Entry ``(index, n)`` of ``A^k`` for ``k = 1..kmax``; ``slope`` is ``|c_index|``."""

    index: int
    magnitudes: tuple
    slope: object
    linear: bool


def finite_order_obstruction(A, kmax: int = 10) -> list[Growth]:
    """Linear growth of ``A^k`` along each ``c_i`` whose eigenvalue equals ``d``.

    ``A`` must have a diagonal upper-left block.  The list is empty exactly
    when no such index exists, i.e. when ``A`` has finite order.
    """
    if isinstance(A, CyclicRep):
        A = A.matrix
    exact = isinstance(A, sympy.MatrixBase)
    n = A.shape[0]
    B = A[: n - 1, : n - 1]
    if exact and not _is_diagonal_exact(B):
        raise ValueError("upper-left block must be diagonal")
    if exact and any(sympy.simplify(A[n - 1, j]) != 0 for j in range(n - 1)):
        raise NotHyperplanePreserving("last row must be (0, ..., 0, d)")
    d = A[n - 1, n - 1]
    out = []
    for i in range(n - 1):
        lam, ci = A[i, i], A[i, n - 1]
        if exact:
            same = sympy.simplify(lam - d) == 0
            nonzero = sympy.simplify(ci) != 0
        else:
            same = abs(lam - d) <= FLOAT_TOL
            nonzero = abs(ci) > FLOAT_TOL
        if not (same and nonzero):
            continue
        mags = []
        P = A
        for k in range(1, kmax + 1):
            e = P[i, n - 1]
            mags.append(sympy.nsimplify(sympy.simplify(sympy.Abs(sympy.expand(e)))) if exact else abs(e))
            P = _clean(P * A) if exact else P @ A
        slope = sympy.nsimplify(sympy.simplify(sympy.Abs(ci))) if exact else abs(ci)
        if exact:
            linear = all(sympy.simplify(m - k * slope) == 0 for k, m in enumerate(mags, 1))
        else:
            linear = all(abs(m - k * slope) <= 1e-9 * k * slope for k, m in enumerate(mags, 1))
        out.append(Growth(i, tuple(mags), slope, linear))
    return out


# -------------------------------------------------------------------- jets

def _truncate(expr, zs, J: int):
    expr = sympy.expand(expr)
    if expr == 0:
        return sympy.Integer(0)
    p = sympy.Poly(expr, *zs)
    return sum((c * sympy.prod(z ** e for z, e in zip(zs, mon)) for mon, c in p.terms() if sum(mon) <= J),
               sympy.Integer(0))


@dataclass(frozen=True)
class PolyGerm:
    """Polynomial self-map of C^n fixing the origin."""

    vars: tuple
    components: tuple
    tag: str = ""

    def __post_init__(self):
        if len(self.vars) != len(self.components):
            raise ValueError("need one component per variable")
        origin = {z: 0 for z in self.vars}
        if any(sympy.simplify(c.subs(origin)) != 0 for c in self.components):
            raise ValueError("germ must fix the origin")

    @property
    def n(self) -> int:
        return len(self.vars)

    def linear_part(self) -> sympy.Matrix:
        zs = self.vars
        return sympy.Matrix([[sympy.diff(c, z).subs({v: 0 for v in zs}) for z in zs] for c in self.components])

    def truncate(self, J: int) -> "PolyGerm":
        return PolyGerm(self.vars, tuple(_truncate(c, self.vars, J) for c in self.components), self.tag)

    def compose(self, other: "PolyGerm", J: int) -> "PolyGerm":
        """``self o other`` truncated at order ``J``."""
        sub = dict(zip(self.vars, other.components))
        return PolyGerm(self.vars, tuple(_truncate(c.subs(sub, simultaneous=True), self.vars, J)
                                         for c in self.components))

    def apply_linear(self, M: sympy.Matrix) -> "PolyGerm":
        """``M o self``."""
        v = M * sympy.Matrix(self.components)
        return PolyGerm(self.vars, tuple(sympy.expand(x) for x in v), self.tag)

    def precompose_linear(self, M: sympy.Matrix) -> "PolyGerm":
        """``self o M``."""
        img = M * sympy.Matrix(self.vars)
        sub = dict(zip(self.vars, img))
        return PolyGerm(self.vars, tuple(sympy.expand(c.subs(sub, simultaneous=True)) for c in self.components),
                        self.tag)

    def equal_to_order(self, other: "PolyGerm", J: int) -> bool:
        return all(sympy.expand(_truncate(a - b, self.vars, J)) == 0
                   for a, b in zip(self.components, other.components))

    def is_identity(self, J: int) -> bool:
        return self.equal_to_order(PolyGerm(self.vars, self.vars), J)

    @classmethod
    def linear(cls, M: sympy.Matrix, vars_=None) -> "PolyGerm":
        n = M.shape[0]
        zs = vars_ or sympy.symbols(f"z1:{n + 1}")
        return cls(tuple(zs), tuple(sympy.expand(x) for x in M * sympy.Matrix(zs)))


def cyclic_group(g: PolyGerm, J: int = DEFAULT_JET, max_order: int = 64) -> list[PolyGerm]:
    """Powers of ``g`` modulo jets of order ``> J``, identity first."""
    ident = PolyGerm(g.vars, g.vars)
    out = [ident]
    p = g.truncate(J)
    while not p.is_identity(J):
        out.append(p)
        if len(out) > max_order:
            raise NotAGroup(f"no g^m = Id to order {J} with m <= {max_order}")
        p = g.compose(p, J)
    return out


def average_jet(germs: Sequence[PolyGerm], J: int = DEFAULT_JET) -> PolyGerm:
    """``sigma = |G|^{-1} sum (d gamma)^{-1} o gamma`` to order ``J``, with its checks.

    Verifies closure of ``germs`` under composition, ``d sigma = Id`` and
    ``sigma o gamma = d gamma o sigma`` for every element, all modulo
    terms of degree above ``J``.
    """
    if J > MAX_JET:
        raise JetOverflow(f"jet order {J} exceeds {MAX_JET}")
    if J < 1:
        raise ValueError("jet order must be at least 1")
    if not germs:
        raise NotAGroup("empty set of germs")
    zs = germs[0].vars
    gs = [g.truncate(J) for g in germs]
    for g in gs:
        if g.vars != zs:
            raise ValueError("germs use different variables")
        if g.linear_part().det() == 0:
            raise NotAGroup("a germ has singular linear part")
    for a in gs:
        for b in gs:
            ab = a.compose(b, J)
            if not any(ab.equal_to_order(c, J) for c in gs):
                raise NotAGroup("the germs are not closed under composition")
    if not any(g.is_identity(J) for g in gs):
        raise NotAGroup("identity missing")
    total = [sympy.Integer(0)] * len(zs)
    for g in gs:
        h = g.apply_linear(g.linear_part().inv())
        total = [t + c for t, c in zip(total, h.components)]
    sigma = PolyGerm(zs, tuple(_truncate(t / len(gs), zs, J) for t in total))
    if sigma.linear_part() != sympy.eye(len(zs)):
        raise ArithmeticError("d sigma is not the identity")
    for g in gs:
        lhs = sigma.compose(g, J)
        rhs = sigma.apply_linear(g.linear_part())
        if not lhs.equal_to_order(rhs, J):
            raise ArithmeticError("sigma is not equivariant")
    return sigma


# ----------------------------------------------------------------- cocycle

@dataclass(frozen=True)
class CocycleReport:
    residual: object
    differences: tuple
    block_diagonal: bool


def abt_cocycle_check(F: PolyGerm, gA: sympy.Matrix, gB: sympy.Matrix, J: int | None = None) -> CocycleReport:
    """Residual of the first-order transition-cocycle invariance on ``z_n = 0``.

    For ``j < n`` compares ``sum_{i<n} gA[j,i] dF^i/dz_n`` with
    ``gB[n,n] (dF^j/dz_n) o gB``; for ``j = n`` the left side must vanish.
    ``F`` must intertwine the two actions: ``F(gB z) = gA F(z)``.
    """
    zs = F.vars
    n = F.n
    gA, gB = sympy.Matrix(gA), sympy.Matrix(gB)
    if gA.shape != (n, n) or gB.shape != (n, n):
        raise ValueError("matrix sizes do not match the map")
    lhs = F.precompose_linear(gB)
    rhs = F.apply_linear(gA)
    ok = lhs.equal_to_order(rhs, J) if J is not None else all(
        sympy.expand(a - b) == 0 for a, b in zip(lhs.components, rhs.components))
    if not ok:
        raise NotEquivariant("F(gB z) != gA F(z)")
    zn = zs[-1]
    on_h = {zn: 0}
    dF = [sympy.diff(c, zn) for c in F.components]
    dF_gB = [sympy.expand(x.subs(dict(zip(zs, gB * sympy.Matrix(zs))), simultaneous=True)) for x in dF]
    diffs = []
    for j in range(n):
        left = sum((gA[j, i] * dF[i] for i in range(n - 1)), sympy.Integer(0))
        right = gB[n - 1, n - 1] * dF_gB[j] if j < n - 1 else sympy.Integer(0)
        diffs.append(sympy.expand((left - right).subs(on_h)))
    coeffs = []
    for dpoly in diffs:
        if dpoly != 0:
            coeffs += [sympy.Abs(c) for c in sympy.Poly(dpoly, *zs).coeffs()]
    residual = max((sympy.nsimplify(sympy.simplify(c)) for c in coeffs), default=sympy.Integer(0))
    return CocycleReport(residual, tuple(diffs), is_block_diagonal(gA) and is_block_diagonal(gB))


def to_fraction_pair(x) -> tuple[Fraction, Fraction] | None:
    """Real and imaginary part of a Gaussian rational, else None."""
    re_, im = sympy.nsimplify(x).as_real_imag()
    if re_.is_Rational and im.is_Rational:
        return Fraction(int(re_.p), int(re_.q)), Fraction(int(im.p), int(im.q))
    return None
