"""Command-line front end.

Every subcommand builds a :class:`Report` of named steps.  ``--json`` prints
it as deterministic JSON (sorted keys, exact numbers as strings); otherwise a
short plain-text summary is printed.  Exit status is 0 when every step
passed, the error's ``exit_code`` when a step raised, and 64 on usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import mpmath
import numpy as np
import sympy

from . import __version__
from .errors import CyConeError, NoDeformation, ParseError, TargetRational

EXIT_USAGE = 64


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- report

def to_jsonable(x: Any) -> Any:
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 30)
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, sympy.MatrixBase):
        return [[str(v) for v in x.row(i)] for i in range(x.rows)]
    if isinstance(x, sympy.Basic):
        return str(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [to_jsonable(v) for v in items]
    if dataclasses.is_dataclass(x):
        return {f.name: to_jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    return str(x)


@dataclasses.dataclass
class Step:
    name: str
    ok: bool
    result: Any = None
    error: str | None = None
    note: str = ""


@dataclasses.dataclass
class Report:
    command: list[str]
    steps: list[Step] = dataclasses.field(default_factory=list)
    exit_status: int = 0
    halted: bool = False
    as_json: bool = dataclasses.field(default=False, repr=False)

    def run(self, name: str, fn: Callable[[], Any], note: str = "",
            expected: tuple[type[CyConeError], ...] = ()) -> Any:
        """Run one step; errors listed in ``expected`` are recorded without failing."""
        if self.halted:
            return None
        try:
            value = fn()
        except expected as exc:
            self.steps.append(Step(name, True, None, f"{type(exc).__name__}: {exc}", note))
            return None
        except CyConeError as exc:
            self.steps.append(Step(name, False, None, f"{type(exc).__name__}: {exc}", note))
            self.exit_status = exc.exit_code
            self.halted = True
            return None
        result, ok = value if isinstance(value, _Checked) else (value, True)
        self.steps.append(Step(name, ok, result, None, note))
        if not ok and self.exit_status == 0:
            self.exit_status = 1
        return result

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "steps": [to_jsonable(s) for s in self.steps],
            "exit_status": self.exit_status,
            "ok": self.exit_status == 0,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = []
        for s in self.steps:
            mark = "ok" if s.ok else "FAIL"
            lines.append(f"[{mark}] {s.name}")
            if s.error:
                lines.append(f"    {s.error}")
            if isinstance(s.result, dict):
                for k, v in s.result.items():
                    lines.append(f"    {k}: {_short(to_jsonable(v))}")
            elif s.result is not None:
                lines.append(f"    {_short(to_jsonable(s.result))}")
        lines.append("status: " + ("ok" if self.exit_status == 0 else f"exit {self.exit_status}"))
        return "\n".join(lines)


class _Checked(tuple):
    """``(result, ok)`` returned by a step that can fail without raising."""


def checked(result: Any, ok: bool) -> _Checked:
    return _Checked((result, bool(ok)))


def _short(v: Any, limit: int = 200) -> str:
    s = json.dumps(v, sort_keys=True) if not isinstance(v, str) else v
    return s if len(s) <= limit else s[: limit - 3] + "..."


# ----------------------------------------------------------------- inputs

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_cone(path: str, require_good: bool = True):
    from .toric import parse_cone
    return parse_cone(_read(path), require_good=require_good)


def _parse_cone_step(rep: Report, path: str, require_good: bool = True):
    cone = rep.run("parse", lambda: _load_cone(path, require_good))
    if cone is not None:
        rep.steps[-1].result = {"label": cone.label, "rays": [list(r) for r in cone.input_rays]}
    return cone


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational number: {text!r}") from None


# ----------------------------------------------------------- cone / reeb

def _polygon_dict(p) -> dict | None:
    if p is None:
        return None
    return {"vertices": [list(v) for v in p.vertices], "lattice_points": len(p.lattice_points),
            "interior_points": len(p.interior_points), "area2": p.area2}


def cmd_cone(args, rep: Report):
    from .toric import check_good, check_gorenstein_height_one, gorenstein_explanation, toric_ideal
    cone = _parse_cone_step(rep, args.file, require_good=False)
    if cone is None:
        return
    rep.steps[-1].result["serialized"] = cone.serialize()

    def good():
        g = check_good(cone)
        return checked({"good": g.ok, "failures": [list(map(list, f.rays)) for f in g.failures()]}, g.ok)

    rep.run("check_good", good, "every face sublattice is spanned by the rays of the face")

    def gor():
        flag, poly = check_gorenstein_height_one(cone)
        return {"gorenstein": flag, "explanation": gorenstein_explanation(cone), "polygon": _polygon_dict(poly)}

    rep.run("check_gorenstein_height_one", gor)

    def ideal():
        ti = toric_ideal(cone, max_degree=args.max_degree)
        counts = {str(d): ti.count(d) for d in range(1, ti.max_degree + 1)}
        return {"hilbert_basis": [list(v) for v in ti.hilbert_basis], "ambient_dim": ti.ambient_dim,
                "generators_by_degree": counts, "generated": ti.generated,
                "generators": [str(g) for g in ti.generators]}

    rep.run("toric_ideal", ideal, "embedding by the Hilbert basis of the dual cone")


VOLUME_NOTE = ("volume of the truncated dual cone, minimized over Reeb vectors (3, a, b); "
               "the value's normalization is a tool convention, only the argmin is meaningful")


def _minimize(cone, tol):
    from .reeb import minimize_volume
    return minimize_volume(cone, tol=tol)


def cmd_reeb(args, rep: Report):
    from .reeb import dirichlet_approximants, reeb_polygon
    cone = _parse_cone_step(rep, args.file)
    if cone is None:
        return
    rep.run("reeb_polygon", lambda: {"vertices": [list(v) for v in reeb_polygon(cone).vertices()]})
    m = rep.run("minimize_volume", lambda: _minimize(cone, args.tol), VOLUME_NOTE)
    if m is None:
        return
    rep.steps[-1].result = {"xi_star": list(m.xi), "gradient_norm": m.gradient_norm, "value": m.value,
                            "iterations": m.iterations}
    if args.action == "approx":
        def approx():
            try:
                aps = dirichlet_approximants(m.xi, args.count, cone)
                note = None
            except TargetRational as exc:
                aps, note = exc.partial, "target is rational; it is its own only approximant"
            out = [{"a": a.xi[1], "b": a.xi[2], "c": a.c, "error": a.error,
                    "error_bound": a.error_bound, "within_bound": a.satisfies_bound()} for a in aps]
            return checked({"approximants": out, "note": note}, all(a.satisfies_bound() for a in aps))

        rep.run("dirichlet_approximants", approx)


# ------------------------------------------------------------------ deform

def _decomp(d) -> list:
    return [[list(v) for v in s] for s in d.summands]


def _approx_for(cone, count, tol):
    from .reeb import dirichlet_approximants
    m = _minimize(cone, tol)
    try:
        return dirichlet_approximants(m.xi, count, cone)
    except TargetRational as exc:
        return exc.partial


def _xi_weight_result(cert) -> dict:
    return {"records": [{"xi": list(r.xi), "c": r.c, "mu": r.mu, "k": r.k, "weight": r.weight}
                        for r in cert.records],
            "limit": cert.limit, "note": cert.note}


def cmd_deform(args, rep: Report):
    from .deform import minkowski_decompositions, rigidity, xi_weight
    cone = _parse_cone_step(rep, args.file)
    if cone is None:
        return
    if args.action == "minkowski":
        def mk():
            if cone.polygon is None:
                return {"decompositions": [], "note": "cone is not Gorenstein; no polygon"}
            return {"decompositions": [_decomp(d) for d in minkowski_decompositions(cone.polygon)]}
        rep.run("minkowski_decompositions", mk)
    elif args.action == "rigidity":
        def rg():
            v = rigidity(cone)
            return {"verdict": str(v), "parameters": v.parameters, "reason": v.reason,
                    "decompositions": [_decomp(d) for d in v.decompositions]}
        rep.run("rigidity", rg)
    else:
        def xw():
            cert = xi_weight(cone, _approx_for(cone, args.approx_count, args.tol))
            return checked(_xi_weight_result(cert), all(r.weight < 0 for r in cert.records))
        rep.run("xi_weight", xw, "weights -k mu / c along rational approximants of the Reeb vector")


# ----------------------------------------------------------------- resolve

def _triangulation_result(p, ts, flops_: bool, regular: bool) -> dict:
    from .resolve import flip_graph, is_regular, symmetry_classes
    out: dict = {"points": [list(q) for q in ts[0].points] if ts else [],
                 "count": len(ts),
                 "triangulations": [[list(c) for c in t.cells] for t in ts],
                 "symmetry_classes": symmetry_classes(p, ts)}
    if flops_:
        edges = flip_graph(ts)
        out["flip_graph"] = [list(e) for e in edges]
        out["flip_graph_connected"] = _connected(len(ts), edges)
    if regular:
        out["regular"] = [is_regular(t).regular for t in ts]
    return out


def _connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for j in adj[stack.pop()] - seen:
            seen.add(j)
            stack.append(j)
    return len(seen) == n


def cmd_resolve(args, rep: Report):
    from .resolve import enumerate_crepant, terminal_partial
    from .errors import NotGorenstein
    cone = _parse_cone_step(rep, args.file)
    if cone is None:
        return

    def poly():
        if cone.polygon is None:
            raise NotGorenstein("crepant resolutions need a height-one polygon")
        return cone.polygon

    p = rep.run("polygon", poly)
    if p is None:
        return
    rep.steps[-1].result = _polygon_dict(p)
    if args.action == "triangulations":
        def tri():
            res = _triangulation_result(p, enumerate_crepant(p), args.flops, args.regular)
            ok = res.get("flip_graph_connected", True) and all(res.get("regular", [True]))
            return checked(res, ok)
        rep.run("enumerate_crepant", tri, "unimodular triangulations are crepant resolutions")
    else:
        def term():
            s = terminal_partial(p)
            return {"cells": [list(c) for c in s.cells], "odp": list(s.odp), "points": [list(q) for q in s.points]}
        rep.run("terminal_partial", term, "parallelogram cells are ordinary double points")


# ------------------------------------------------------------------- wproj

def cmd_wproj(args, rep: Report):
    from .wpoly.family import (
        affine_fiber_singular_points,
        base_change,
        fiber_divisor_at_infinity,
        parse_ideal,
        smooth_at_infinity,
        wproj_closure,
    )
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fam = rep.run("parse", lambda: parse_ideal(_read(args.file)))
    if fam is None:
        return
    rep.steps[-1].result = {"vars": list(fam.vars), "weights": list(fam.weights),
                            "gens": [str(g) for g in fam.gens], "notes": fam.notes}
    t = _fraction(args.t)
    if args.action == "basechange":
        def bc():
            g = base_change(fam)
            homog = all(p.is_weighted_homogeneous(g.weights) for p in g.gens)
            return checked({"vars": list(g.vars), "weights": list(g.weights), "gens": [str(p) for p in g.gens],
                            "weighted_homogeneous": homog}, homog)
        rep.run("base_change", bc, "t = s^mu")
        return
    cl = rep.run("wproj_closure", lambda: wproj_closure(fam))
    if cl is None:
        return
    rep.steps[-1].result = {"vars": list(cl.vars), "weights": list(cl.weights), "gens": [str(g) for g in cl.gens],
                            "charts": [{"index": c.index, "order": c.order, "coords": list(c.coords),
                                        "exponents": list(c.exponents)} for c in cl.charts]}
    if args.action == "close":
        return
    if args.action == "fiber":
        def fib():
            cmp_ = fiber_divisor_at_infinity(cl, t)
            sing = affine_fiber_singular_points(fam, t)
            return checked({"t": t, "divisor_t": [str(p) for p in cmp_.divisor_t],
                            "divisor_0": [str(p) for p in cmp_.divisor_0],
                            "equal": cmp_.equal, "contained": cmp_.contained,
                            "affine_fiber_smooth": sing.is_unit()}, cmp_.equal)
        rep.run("fiber_divisor_at_infinity", fib, "divisor at infinity of the fiber over t against t = 0")
    elif args.action == "smooth":
        def sm():
            r = smooth_at_infinity(cl, t)
            pts = [{"chart": p.chart, "point": [str(x) for x in p.point], "smooth": p.smooth,
                    "stabilizer": p.stabilizer, "jacobian_rank": p.jacobian_rank, "codim": p.codim}
                   for p in r.points]
            return checked({"t": t, "points": pts, "divisor_smooth": r.divisor_smooth}, r.smooth)
        rep.run("smooth_at_infinity", sm)


# ------------------------------------------------------------------ sasaki

def cmd_sasaki(args, rep: Report):
    from .sasaki import typeI_report

    try:
        weights = [float(x) for x in args.weights.split(",")]
    except ValueError:
        raise UsageError("--weights must be comma-separated reals") from None
    if len(weights) != args.dim:
        raise UsageError(f"--weights needs {args.dim} entries")

    def run():
        r = typeI_report(args.dim, weights, args.samples, seed=args.seed)
        ok = (r["identity_residual"] <= 1e-10 and r["radius_bound_violation"] <= 1e-9
              and r["c0_violation"] <= 0 and r["c1_constant"] <= 2
              and r["linearized_flow_residual"] <= 1e-6 and r["pushforward_residual"] <= 1e-6
              and r["flow_crosscheck_max_error"] <= 1e-8)
        return checked(r, ok)

    rep.run("typeI", run, "Type I deformation identities, flow-map radius bounds and C^0/C^1 estimates")


# --------------------------------------------------------------- linearize

def cmd_linearize(args, rep: Report):
    from .linearize import (
        CyclicRep,
        abt_cocycle_check,
        average_jet,
        block_diagonalize,
        cyclic_group,
        finite_order_obstruction,
        is_block_diagonal,
        parse_map,
        parse_matrix,
    )
    action = args.action or "block"
    if action == "cocycle":
        if not (args.map and args.gA and args.gB):
            raise UsageError("cocycle needs --map, --gA and --gB")
        F = rep.run("parse", lambda: parse_map(_read(args.map)))
        if F is not None:
            rep.steps[-1].result = [str(c) for c in F.components]
        gA = rep.run("parse_gA", lambda: parse_matrix(_read(args.gA)))
        gB = rep.run("parse_gB", lambda: parse_matrix(_read(args.gB)))
        if rep.halted:
            return

        def coc():
            r = abt_cocycle_check(F, gA, gB)
            return {"residual": r.residual, "differences": list(r.differences), "block_diagonal": r.block_diagonal}

        rep.run("abt_cocycle_check", coc, "first-order transition cocycle invariance on z_n = 0")
        return
    if action == "average":
        if not args.map:
            raise UsageError("average needs --map")
        g = rep.run("parse", lambda: parse_map(_read(args.map)))
        if g is None:
            return
        rep.steps[-1].result = [str(c) for c in g.components]

        def avg():
            grp = cyclic_group(g, args.jet)
            s = average_jet(grp, args.jet)
            return {"group_order": len(grp), "sigma": [str(c) for c in s.components], "jet": args.jet}

        rep.run("average_jet", avg)
        return
    if not args.matrix:
        raise UsageError("--matrix is required")
    A = rep.run("parse", lambda: parse_matrix(_read(args.matrix)))
    if A is None:
        return
    if action == "obstruction":
        def obs():
            g = finite_order_obstruction(A, args.kmax)
            return {"growth": [{"index": x.index, "magnitudes": list(x.magnitudes), "slope": x.slope,
                                "linear": x.linear} for x in g], "finite_order": not g}
        rep.run("finite_order_obstruction", obs)
        return

    def bd():
        r = CyclicRep.from_matrix(A)
        out = block_diagonalize(r)
        return checked({"order": r.order, "R": out.R, "conjugated": out.conjugated,
                        "unitarized": out.unitarized}, is_block_diagonal(out.conjugated))

    rep.run("block_diagonalize", bd, "R A R^-1 in GL(n-1) x C^*")


# ----------------------------------------------------------- classify-toric

def cmd_classify(args, rep: Report):
    from .deform import minkowski_decompositions, rigidity, xi_weight
    from .reeb import dirichlet_approximants, reeb_polygon
    from .resolve import enumerate_crepant, terminal_partial
    from .toric import check_good, check_gorenstein_height_one, toric_ideal

    cone = _parse_cone_step(rep, args.file)
    if cone is None:
        return
    rep.run("check_good", lambda: checked({"good": check_good(cone).ok}, check_good(cone).ok))

    def gor():
        flag, poly = check_gorenstein_height_one(cone)
        return {"gorenstein": flag, "polygon": _polygon_dict(poly)}

    rep.run("check_gorenstein_height_one", gor)

    def ideal():
        ti = toric_ideal(cone, max_degree=args.max_degree)
        return {"quadrics": ti.count(2) if ti.max_degree >= 2 else None, "ambient_dim": ti.ambient_dim,
                "generated": ti.generated}

    rep.run("toric_ideal", ideal, "embedding by the Hilbert basis of the dual cone")
    rep.run("reeb_polygon", lambda: {"vertices": [list(v) for v in reeb_polygon(cone).vertices()]})
    m = rep.run("minimize_volume", lambda: _minimize(cone, args.tol), VOLUME_NOTE)
    if m is None:
        return
    rep.steps[-1].result = {"xi_star": list(m.xi), "gradient_norm": m.gradient_norm, "value": m.value}

    def approx():
        try:
            return dirichlet_approximants(m.xi, args.approx_count, cone)
        except TargetRational as exc:
            return exc.partial

    aps = rep.run("dirichlet_approximants", approx)
    if aps is None:
        return
    rep.steps[-1].result = [{"a": a.xi[1], "b": a.xi[2], "c": a.c, "error_bound": a.error_bound,
                             "within_bound": a.satisfies_bound()} for a in aps]

    def rg():
        v = rigidity(cone)
        return {"verdict": str(v), "parameters": v.parameters, "reason": v.reason}

    rep.run("rigidity", rg)
    rep.run("minkowski_decompositions",
            lambda: [_decomp(d) for d in minkowski_decompositions(cone.polygon)] if cone.polygon else [])
    rep.run("xi_weight", lambda: _xi_weight_result(xi_weight(cone, aps)),
            "negative weight along every approximant", expected=(NoDeformation,))
    if cone.polygon is None:
        return

    def tri():
        res = _triangulation_result(cone.polygon, enumerate_crepant(cone.polygon), True, True)
        return checked(res, res["flip_graph_connected"] and all(res["regular"]))

    rep.run("enumerate_crepant", tri)

    def term():
        s = terminal_partial(cone.polygon)
        return {"cells": [list(c) for c in s.cells], "odp_cells": sum(s.odp)}

    rep.run("terminal_partial", term)


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _globals(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    parser.add_argument("--seed", type=int, default=d(0), help="seed for all random sampling")
    parser.add_argument("--tol", type=float, default=d(1e-10), help="numerical tolerance")
    parser.add_argument("--max-degree", type=int, default=d(2), help="toric ideal degree bound")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cyconekit", description="Toric Calabi-Yau cone toolkit")
    p.add_argument("--version", action="version", version=__version__)
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        _globals(sp, suppress=True)
        return sp

    c = add("cone", help="goodness, Gorenstein test and toric ideal")
    c.add_argument("file")

    r = add("reeb", help="volume minimization and Dirichlet approximants")
    r.add_argument("action", choices=["minimize", "approx"])
    r.add_argument("file")
    r.add_argument("--count", type=int, default=5)

    d = add("deform", help="Minkowski decompositions, rigidity, xi-weights")
    d.add_argument("action", choices=["minkowski", "rigidity", "xi-weight"])
    d.add_argument("file")
    d.add_argument("--approx-count", type=int, default=5)

    s = add("resolve", help="crepant resolutions")
    s.add_argument("action", choices=["triangulations", "terminal"])
    s.add_argument("file")
    s.add_argument("--flops", action="store_true")
    s.add_argument("--regular", action="store_true")

    w = add("wproj", help="weighted projective closure of a family")
    w.add_argument("action", choices=["close", "fiber", "smooth", "basechange"])
    w.add_argument("file")
    w.add_argument("--t", default="1")

    k = add("sasaki", help="Type I deformation checks on flat C^n")
    k.add_argument("action", choices=["typeI"])
    k.add_argument("--dim", type=int, required=True)
    k.add_argument("--weights", required=True)
    k.add_argument("--samples", type=int, default=100)

    ln = add("linearize", help="block-diagonalize finite cyclic linear actions")
    ln.add_argument("action", nargs="?", choices=["block", "obstruction", "cocycle", "average"])
    ln.add_argument("--matrix")
    ln.add_argument("--map")
    ln.add_argument("--gA")
    ln.add_argument("--gB")
    ln.add_argument("--kmax", type=int, default=10)
    ln.add_argument("--jet", type=int, default=4)

    ct = add("classify-toric", help="run the full toric pipeline on a cone file")
    ct.add_argument("file")
    ct.add_argument("--approx-count", type=int, default=5)
    return p


COMMANDS = {
    "cone": cmd_cone,
    "reeb": cmd_reeb,
    "deform": cmd_deform,
    "resolve": cmd_resolve,
    "wproj": cmd_wproj,
    "sasaki": cmd_sasaki,
    "linearize": cmd_linearize,
    "classify-toric": cmd_classify,
}


def run(argv: Sequence[str]) -> tuple[Report, int]:
    """Parse ``argv`` and execute; returns the report and the exit status."""
    parser = build_parser()
    args = parser.parse_args(list(argv))
    if args.command is None:
        raise UsageError("a subcommand is required")
    rep = Report(list(argv), as_json=args.json)
    try:
        COMMANDS[args.command](args, rep)
    except CyConeError as exc:
        rep.steps.append(Step("error", False, None, f"{type(exc).__name__}: {exc}"))
        rep.exit_status = exc.exit_code
    return rep, rep.exit_status


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        rep, status = run(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(rep.to_json() if rep.as_json else rep.to_text())
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
