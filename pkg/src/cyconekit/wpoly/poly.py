"""Sparse multivariate polynomials with exact rational coefficients."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

Exp = tuple[int, ...]


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"non-rational coefficient {c!r}")


class Poly:
    """Polynomial over Q in a fixed ordered tuple of variable names."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exp, object] | None = None):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean: dict[Exp, Fraction] = {}
        for e, c in (terms or {}).items():
            c = _coerce(c)
            if c:
                e = tuple(e)
                if len(e) != n:
                    raise ValueError("exponent length does not match variables")
                clean[e] = c
        self.terms = clean

    # constructors
    @classmethod
    def const(cls, vars: Sequence[str], c) -> "Poly":
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def var(cls, vars: Sequence[str], name: str) -> "Poly":
        i = list(vars).index(name)
        return cls(vars, {tuple(int(j == i) for j in range(len(vars))): 1})

    @classmethod
    def monomial(cls, vars: Sequence[str], exp: Exp, c=1) -> "Poly":
        return cls(vars, {tuple(exp): c})

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def wdegree(self, weights: Sequence[int]) -> int:
        return max((_wdot(e, weights) for e in self.terms), default=-1)

    def is_weighted_homogeneous(self, weights: Sequence[int]) -> bool:
        return len({_wdot(e, weights) for e in self.terms}) <= 1

    def weighted_components(self, weights: Sequence[int]) -> dict[int, "Poly"]:
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            out.setdefault(_wdot(e, weights), {})[e] = c
        return {w: Poly(self.vars, t) for w, t in sorted(out.items())}

    def _check(self, other: "Poly") -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.vars, other)

    # arithmetic
    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(self.vars, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _coerce(other)
            return Poly(self.vars, {e: c * v for e, v in self.terms.items()})
        self._check(other)
        t: dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Poly(self.vars, t)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("division only by nonzero constants")
            other = other.terms[(0,) * len(self.vars)]
        return self * (Fraction(1) / _coerce(other))

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.vars == other.vars and self.terms == other.terms
        try:
            return self == Poly.const(self.vars, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # calculus and substitution
    def diff(self, name: str) -> "Poly":
        i = self.vars.index(name)
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return Poly(self.vars, t)

    def subs(self, mapping: Mapping[str, object], new_vars: Sequence[str] | None = None) -> "Poly":
        """Substitute polynomials (in ``new_vars``) or numbers for variables.

        Variables not in ``mapping`` must also appear in ``new_vars``.
        """
        new_vars = tuple(new_vars) if new_vars is not None else self.vars
        images = []
        for v in self.vars:
            if v in mapping:
                img = mapping[v]
                images.append(img if isinstance(img, Poly) else Poly.const(new_vars, img))
            else:
                images.append(Poly.var(new_vars, v))
        out = Poly(new_vars)
        cache: dict[tuple[int, int], Poly] = {}
        for e, c in self.terms.items():
            term = Poly.const(new_vars, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = images[i] ** k
                    term = term * cache[key]
            out = out + term
        return out

    def evaluate(self, point: Mapping[str, object], coerce: Callable | None = None):
        """Evaluate at a point given as ``{name: value}``.

        ``coerce`` converts coefficients into the values' number type (for
        instance ``sympy.Rational`` when evaluating at Gaussian rationals).
        """
        conv = coerce or (lambda c: c)
        vals = [point[v] for v in self.vars]
        total = conv(Fraction(0))
        for e, c in self.terms.items():
            term = conv(c)
            for x, k in zip(vals, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def embed(self, new_vars: Sequence[str]) -> "Poly":
        """Same polynomial viewed in a ring with more (or reordered) variables."""
        new_vars = tuple(new_vars)
        idx = [new_vars.index(v) for v in self.vars]
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * len(new_vars)
            for i, k in zip(idx, e):
                e2[i] = k
            t[tuple(e2)] = c
        return Poly(new_vars, t)

    def drop_unused(self, keep: Iterable[str]) -> "Poly":
        keep = tuple(keep)
        for i, v in enumerate(self.vars):
            if v not in keep and any(e[i] for e in self.terms):
                raise ValueError(f"variable {v} still occurs")
        return self.embed_subset(keep)

    def embed_subset(self, keep: Sequence[str]) -> "Poly":
        idx = [self.vars.index(v) for v in keep]
        return Poly(keep, {tuple(e[i] for i in idx): c for e, c in self.terms.items()})

    def variables_used(self) -> set[str]:
        return {v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms)}

    # presentation
    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda it: grevlex_key(it[0]), reverse=True):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                body = mono
            elif mono:
                body = f"{a}*{mono}"
            else:
                body = str(a)
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s


def _wdot(e: Exp, w: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(e, w))


# ------------------------------------------------------------ monomial orders

def lex_key(e: Exp):
    return e


def grevlex_key(e: Exp):
    return (sum(e), tuple(-x for x in reversed(e)))


def order_key(order: str, weights: Sequence[int] | None = None) -> Callable[[Exp], tuple]:
    """Sort key for exponent vectors; larger key means larger monomial.

    Supported orders: ``lex``, ``grevlex`` and ``wdeg`` (weighted degree
    refined by grevlex; needs ``weights``).
    """
    if order == "lex":
        return lex_key
    if order == "grevlex":
        return grevlex_key
    if order == "wdeg":
        if weights is None:
            raise ValueError("wdeg order needs weights")
        w = tuple(weights)
        return lambda e: (_wdot(e, w),) + grevlex_key(e)
    raise ValueError(f"unknown monomial order {order!r}")
