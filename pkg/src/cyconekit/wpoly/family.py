"""Weighted homogeneous one-parameter families and their weighted projective closures.

A family is an ideal in ``t, z1..zN`` homogeneous for weights ``(mu; m1..mN)``.
Its closure lives in ``P(mu, m1, .., mN, 1)`` with coordinates
``(tau, zeta1..zetaN, w)``, where ``t = tau / w^mu`` and ``z_n = zeta_n / w^m_n``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd
from typing import Sequence

import sympy

from ..errors import (
    MixedWeightGenerator,
    NonCoprimeWeights,
    NonZeroDimensionalDivisor,
    ParseError,
)
from .groebner import GroebnerBasis, groebner
from .parse import parse_poly
from .poly import Poly


@dataclass
class WeightedFamily:
    vars: tuple[str, ...]  # parameter first
    weights: tuple[int, ...]  # (mu, m1, .., mN)
    gens: list[Poly]
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.vars) != len(self.weights):
            raise ParseError("one weight per variable is required")
        if any(w <= 0 for w in self.weights):
            raise ParseError("weights must be positive integers")
        if reduce(gcd, self.weights[1:], 0) != 1:
            raise NonCoprimeWeights(f"weights {self.weights[1:]} are not coprime")
        for g in self.gens:
            if not g.is_weighted_homogeneous(self.weights):
                raise MixedWeightGenerator(f"generator {g} is not weighted homogeneous")

    @property
    def param(self) -> str:
        return self.vars[0]

    @property
    def mu(self) -> int:
        return self.weights[0]

    @property
    def coords(self) -> tuple[str, ...]:
        return self.vars[1:]

    def fiber(self, t_value) -> list[Poly]:
        """Generators of the fiber over ``t_value`` in the ring of ``z`` only."""
        t = Fraction(t_value)
        return [g.subs({self.param: t}, self.coords) for g in self.gens]

    def serialize(self) -> str:
        lines = ["vars: " + " ".join(self.vars), "weights: " + " ".join(map(str, self.weights))]
        lines += [f"gen: {g}" for g in self.gens]
        return "\n".join(lines) + "\n"


def parse_ideal(text: str, decompose: bool = True) -> WeightedFamily:
    """Read ``vars:``, ``weights:`` and ``gen:`` lines (``#`` starts a comment).

    Inhomogeneous generators are split into weighted homogeneous pieces with
    a warning, unless ``decompose`` is off.
    """
    vars_: tuple[str, ...] | None = None
    weights: tuple[int, ...] | None = None
    raw_gens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"line {lineno}: expected 'key: value'")
        if key == "vars":
            vars_ = tuple(rest.split())
            if len(set(vars_)) != len(vars_) or len(vars_) < 2:
                raise ParseError(f"line {lineno}: need a parameter and distinct coordinates")
        elif key == "weights":
            try:
                weights = tuple(int(x) for x in rest.replace(";", " ").replace(",", " ").split())
            except ValueError:
                raise ParseError(f"line {lineno}: weights must be integers") from None
        elif key == "gen":
            raw_gens.append(rest)
        else:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
    if vars_ is None or weights is None:
        raise ParseError("missing vars or weights line")
    if not raw_gens:
        raise ParseError("no generators")
    gens: list[Poly] = []
    notes: list[str] = []
    for text_g in raw_gens:
        g = parse_poly(text_g, vars_)
        if len(weights) == len(vars_) and not g.is_weighted_homogeneous(weights):
            if not decompose:
                raise MixedWeightGenerator(f"generator {g} mixes weights")
            parts = list(g.weighted_components(weights).values())
            msg = f"generator {g} split into {len(parts)} weighted homogeneous pieces"
            warnings.warn(msg)
            notes.append(msg)
            gens.extend(parts)
        elif not g.is_zero():
            gens.append(g)
    return WeightedFamily(vars_, weights, gens, notes)


def base_change(f: WeightedFamily, new_param: str = "s") -> WeightedFamily:
    """Substitute ``t = s^mu``; the new parameter has weight 1."""
    new_vars = (new_param,) + f.coords
    s = Poly.var(new_vars, new_param)
    gens = [g.subs({f.param: s ** f.mu}, new_vars) for g in f.gens]
    out = WeightedFamily(new_vars, (1,) + f.weights[1:], gens, list(f.notes))
    return out


# ---------------------------------------------------------------- closure

@dataclass(frozen=True)
class Chart:
    """The ``zeta_n != 0`` chart: C^{N+1} / Z_order with the given diagonal exponents."""

    index: int  # n, 1-based
    order: int
    coords: tuple[str, ...]  # (tau, zeta_j for j != n, w)
    exponents: tuple[int, ...]

    def stabilizer_order(self, point: Sequence) -> int:
        g = self.order
        for x, e in zip(point, self.exponents):
            if x != 0:
                g = gcd(g, e)
        return g


@dataclass
class WProjClosure:
    family: WeightedFamily
    vars: tuple[str, ...]  # (tau, zeta.., w)
    weights: tuple[int, ...]  # (mu, m.., 1)
    gens: list[Poly]
    charts: list[Chart]

    def dehomogenize(self) -> list[Poly]:
        """Set ``w = 1`` and rename back to the family's variables."""
        f = self.family
        ren = {"tau": f.param}
        ren.update({f"zeta{k + 1}": v for k, v in enumerate(f.coords)})
        out = []
        for g in self.gens:
            h = g.subs({"w": 1}, self.vars[:-1])
            out.append(Poly(tuple(ren[v] for v in h.vars), h.terms))
        return out


def _homogenize(g: Poly, weights: Sequence[int], hvars: Sequence[str]) -> Poly:
    """Weighted homogenization with an extra last variable of weight 1."""
    d = g.wdegree(weights)
    terms = {}
    for e, c in g.terms.items():
        wt = sum(a * b for a, b in zip(e, weights))
        terms[tuple(e) + (d - wt,)] = c
    return Poly(hvars, terms)


def wproj_closure(f: WeightedFamily) -> WProjClosure:
    n = len(f.coords)
    hvars = ("tau",) + tuple(f"zeta{k + 1}" for k in range(n)) + ("w",)
    gens = [_homogenize(g, f.weights, hvars) for g in f.gens]
    charts = []
    for k in range(n):
        coords = ("tau",) + tuple(f"zeta{j + 1}" for j in range(n) if j != k) + ("w",)
        exps = (f.mu,) + tuple(f.weights[1 + j] for j in range(n) if j != k) + (1,)
        charts.append(Chart(k + 1, f.weights[1 + k], coords, exps))
    return WProjClosure(f, hvars, tuple(f.weights) + (1,), gens, charts)


def _zeta_ring(f: WeightedFamily) -> tuple[str, ...]:
    return tuple(f"zeta{k + 1}" for k in range(len(f.coords)))


def divisor_ideal(f: WeightedFamily, t_value) -> list[Poly]:
    """Ideal of the divisor at infinity of the fiber closure, in ``zeta`` variables.

    The closure of an affine variety is generated by the weighted
    homogenizations of a Groebner basis for a weighted-degree order, so the
    locus ``w = 0`` is cut out by the top weighted forms of that basis.
    """
    zw = f.weights[1:]
    fib = [g for g in f.fiber(t_value) if not g.is_zero()]
    zr = _zeta_ring(f)
    if not fib:
        return [Poly(zr)]
    G = groebner(fib, "wdeg", zw)
    tops = []
    for g in G.polys:
        d = g.wdegree(zw)
        top = Poly(zr, {e: c for e, c in g.terms.items() if sum(a * b for a, b in zip(e, zw)) == d})
        tops.append(top)
    return tops


def fiber_closure_ideal(f: WeightedFamily, t_value) -> list[Poly]:
    """Homogeneous ideal of the closure of the fiber over ``t_value`` in (tau, zeta, w)."""
    hvars = ("tau",) + _zeta_ring(f) + ("w",)
    zw = f.weights[1:]
    fib = [g for g in f.fiber(t_value) if not g.is_zero()]
    out = []
    if fib:
        G = groebner(fib, "wdeg", zw)
        for g in G.polys:
            out.append(_homogenize(g, zw, hvars[1:]).embed(hvars))
    tau = Poly.var(hvars, "tau")
    w = Poly.var(hvars, "w")
    out.append(tau - (w ** f.mu) * Fraction(t_value))
    return out


def _chart_basis(polys: Sequence[Poly], k: int, keep: Sequence[str]) -> GroebnerBasis | None:
    """Reduced basis of the ideal after setting ``zeta_k = 1``; None for the zero ideal."""
    name = f"zeta{k}"
    ps = [p.subs({name: 1}, keep) for p in polys]
    ps = [p for p in ps if not p.is_zero()]
    if not ps:
        return None
    return groebner(ps, "grevlex")


@dataclass
class DivisorComparison:
    t_value: Fraction
    divisor_t: list[Poly]
    divisor_0: list[Poly]
    equal: bool
    contained: bool  # D_t subscheme of D_0, i.e. I(D_0) inside I(D_t) on every chart


def fiber_divisor_at_infinity(cl: WProjClosure, t_value) -> DivisorComparison:
    f = cl.family
    t = Fraction(t_value)
    dt = divisor_ideal(f, t)
    d0 = divisor_ideal(f, 0)
    zr = _zeta_ring(f)
    equal = True
    contained = True
    for k in range(1, len(zr) + 1):
        keep = tuple(v for v in zr if v != f"zeta{k}")
        gt = _chart_basis(dt, k, keep)
        g0 = _chart_basis(d0, k, keep)
        if (gt.polys if gt else []) != (g0.polys if g0 else []):
            equal = False
        if g0 is not None and (gt is None or not all(gt.contains(p) for p in g0.polys)):
            contained = False
    return DivisorComparison(t, dt, d0, equal, contained)


# -------------------------------------------------------------- smoothness

def _jacobian(polys: Sequence[Poly], names: Sequence[str]) -> list[list[Poly]]:
    return [[p.diff(v) for v in names] for p in polys]


def _sym(x):
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.nsimplify(x) if isinstance(x, float) else x


def _rank_at(jac: list[list[Poly]], point: dict) -> int:
    m = sympy.Matrix([[q.evaluate(point, _sym) for q in row] for row in jac])
    m = m.applyfunc(lambda e: sympy.nsimplify(sympy.expand(e)) if e.is_number else e)
    return m.rank(simplify=True)


def _singular_locus(polys: list[Poly], names: tuple[str, ...]) -> tuple[GroebnerBasis, int]:
    """Basis of ideal + maximal-codimension Jacobian minors, and that codimension."""
    G = groebner(polys, "grevlex")
    if G.is_unit():
        return G, 0
    codim = len(names) - G.krull_dimension()
    jac = _jacobian(G.polys, names)
    minors = []
    for rows in combinations(range(len(jac)), codim):
        for cols in combinations(range(len(names)), codim):
            sub = [[jac[r][c] for c in cols] for r in rows]
            minors.append(_poly_det(sub))
    S = groebner(list(G.polys) + [m for m in minors if not m.is_zero()] or list(G.polys), "grevlex")
    return S, codim


def _poly_det(m: list[list[Poly]]) -> Poly:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _poly_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass
class PointReport:
    chart: int  # 0 for the affine chart w != 0
    point: tuple
    smooth: bool
    stabilizer: int
    jacobian_rank: int
    codim: int


@dataclass
class SmoothnessReport:
    t_value: Fraction
    points: list[PointReport]
    divisor_smooth: bool  # exact: singular locus misses the divisor in every chart

    @property
    def smooth(self) -> bool:
        return self.divisor_smooth and all(p.smooth for p in self.points)


def _chart_fiber(f: WeightedFamily, t_value, chart: Chart) -> list[Poly]:
    hv = ("tau",) + _zeta_ring(f) + ("w",)
    ideal = fiber_closure_ideal(f, t_value)
    return [p.embed(hv).subs({f"zeta{chart.index}": 1}, chart.coords) for p in ideal]


def smooth_at_infinity(cl: WProjClosure, t_value, points: Sequence[tuple[int, tuple]] | None = None) -> SmoothnessReport:
    """Jacobian test for the lifted fiber closure at the points of the divisor at infinity.

    ``points`` lists ``(chart index, coordinates in chart.coords)``; when
    omitted, the divisor points are solved for in every chart, which
    requires the divisor to be finite.
    """
    f = cl.family
    t = Fraction(t_value)
    reports: list[PointReport] = []
    divisor_smooth = True
    per_chart = {}
    for ch in cl.charts:
        eqs = [p for p in _chart_fiber(f, t, ch) if not p.is_zero()]
        S, codim = _singular_locus(eqs, ch.coords)
        per_chart[ch.index] = (eqs, codim)
        # divisor in this chart: fiber equations plus w = 0
        w = Poly.var(ch.coords, "w")
        sing_at_inf = groebner(list(S.polys) + [w], "grevlex")
        if not sing_at_inf.is_unit():
            divisor_smooth = False
    if points is None:
        points = []
        for ch in cl.charts:
            eqs, _ = per_chart[ch.index]
            w = Poly.var(ch.coords, "w")
            D = groebner(eqs + [w], "grevlex")
            if D.is_unit():
                continue
            if D.krull_dimension() != 0:
                raise NonZeroDimensionalDivisor(f"divisor in chart {ch.index} is not finite")
            syms = sympy.symbols(" ".join(ch.coords))
            syms = syms if isinstance(syms, tuple) else (syms,)
            exprs = [sympy.sympify(str(p).replace("^", "**"), locals=dict(zip(ch.coords, syms)))
                     for p in D.polys]
            for sol in sympy.solve(exprs, syms, dict=True):
                points.append((ch.index, tuple(sympy.nsimplify(sol.get(s, 0)) for s in syms)))
    charts = {ch.index: ch for ch in cl.charts}
    for idx, pt in points:
        ch = charts[idx]
        if len(pt) != len(ch.coords):
            raise ValueError(f"chart {idx} points have coordinates {ch.coords}")
        eqs, codim = per_chart[idx]
        jac = _jacobian(eqs, ch.coords)
        env = dict(zip(ch.coords, pt))
        rank = _rank_at(jac, env)
        reports.append(PointReport(idx, tuple(pt), rank == codim, ch.stabilizer_order(pt), rank, codim))
    return SmoothnessReport(t, reports, divisor_smooth)


def affine_fiber_singular_points(f: WeightedFamily, t_value) -> GroebnerBasis:
    """Basis of the singular-locus ideal of the affine fiber (unit ideal iff smooth)."""
    eqs = [g for g in f.fiber(t_value) if not g.is_zero()]
    S, _ = _singular_locus(eqs, f.coords)
    return S


def affine_point_smooth(f: WeightedFamily, t_value, point: Sequence) -> bool:
    eqs = [g for g in f.fiber(t_value) if not g.is_zero()]
    env = dict(zip(f.coords, [Fraction(x) for x in point]))
    if any(g.evaluate(env) != 0 for g in eqs):
        raise ValueError("point is not on the fiber")
    G = groebner(eqs, "grevlex")
    codim = len(f.coords) - G.krull_dimension()
    return _rank_at(_jacobian(G.polys, f.coords), env) == codim
