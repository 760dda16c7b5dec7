"""Buchberger's algorithm with sugar pair selection and Gebauer-Moeller pruning."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

from ..errors import ResourceCapExceeded
from .poly import Exp, Poly, order_key

DEFAULT_CAP = 20000


def _divides(a: Exp, b: Exp) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exp, b: Exp) -> Exp:
    return tuple(max(x, y) for x, y in zip(a, b))


def _coprime(a: Exp, b: Exp) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


class _Ring:
    def __init__(self, key: Callable[[Exp], tuple]):
        self.key = key

    def lead(self, p: dict[Exp, Fraction]) -> Exp:
        return max(p, key=self.key)

    def reduce(self, f: dict, basis: list[tuple[Exp, Fraction, dict]], full: bool = True) -> dict:
        """Remainder of ``f`` on division by ``basis``; head-only if ``full`` is off."""
        p = dict(f)
        r: dict[Exp, Fraction] = {}
        key = self.key
        while p:
            m = max(p, key=key)
            c = p[m]
            for lm, lc, g in basis:
                if _divides(lm, m):
                    q = c / lc
                    shift = tuple(x - y for x, y in zip(m, lm))
                    for e, gc in g.items():
                        e2 = tuple(a + b for a, b in zip(e, shift))
                        v = p.get(e2, 0) - q * gc
                        if v:
                            p[e2] = v
                        else:
                            p.pop(e2, None)
                    break
            else:
                if not full:
                    r.update(p)
                    return r
                r[m] = c
                del p[m]
        return r


@dataclass
class GroebnerBasis:
    """Reduced, monic Groebner basis together with its monomial order."""

    vars: tuple[str, ...]
    order: str
    weights: tuple[int, ...] | None
    polys: list[Poly]

    @property
    def key(self):
        return order_key(self.order, self.weights)

    def leading_monomials(self) -> list[Exp]:
        return [max(p.terms, key=self.key) for p in self.polys]

    def reduce(self, f: Poly) -> Poly:
        ring = _Ring(self.key)
        basis = [(max(p.terms, key=self.key), Fraction(1), p.terms) for p in self.polys]
        return Poly(self.vars, ring.reduce(f.terms, basis))

    def contains(self, f: Poly) -> bool:
        return self.reduce(f).is_zero()

    def is_unit(self) -> bool:
        return any(p.is_constant() and not p.is_zero() for p in self.polys)

    def krull_dimension(self) -> int:
        """Dimension of the quotient ring, read off the leading-monomial ideal."""
        if self.is_unit():
            return -1
        n = len(self.vars)
        supports = [frozenset(i for i, x in enumerate(m) if x) for m in self.leading_monomials()]
        best = 0
        for k in range(n, 0, -1):
            for s in combinations(range(n), k):
                ss = frozenset(s)
                if not any(sup <= ss for sup in supports):
                    return k
        return best

    def standard_monomial_count(self, degree: int, weights: Sequence[int] | None = None) -> int:
        """Number of monomials of the given (weighted) degree outside the initial ideal."""
        w = tuple(weights) if weights is not None else (1,) * len(self.vars)
        lms = self.leading_monomials()
        count = 0
        for e in _monomials_of_degree(w, degree):
            if not any(_divides(m, e) for m in lms):
                count += 1
        return count

    def is_groebner(self) -> bool:
        """Independent confluence check: every S-polynomial reduces to zero."""
        ring = _Ring(self.key)
        basis = [(max(p.terms, key=self.key), p.terms[max(p.terms, key=self.key)], p.terms)
                 for p in self.polys]
        for (l1, c1, g1), (l2, c2, g2) in combinations(basis, 2):
            s = _spoly(l1, c1, g1, l2, c2, g2)
            if ring.reduce(s, basis):
                return False
        return True


def _monomials_of_degree(w: Sequence[int], d: int):
    n = len(w)

    def rec(i, rem):
        if i == n - 1:
            if rem % w[i] == 0:
                yield (rem // w[i],)
            return
        for k in range(rem // w[i] + 1):
            for rest in rec(i + 1, rem - k * w[i]):
                yield (k,) + rest

    if d < 0:
        return
    yield from rec(0, d)


def _spoly(l1, c1, g1, l2, c2, g2) -> dict:
    lcm = _lcm(l1, l2)
    s1 = tuple(a - b for a, b in zip(lcm, l1))
    s2 = tuple(a - b for a, b in zip(lcm, l2))
    out: dict[Exp, Fraction] = {}
    for e, c in g1.items():
        e2 = tuple(a + b for a, b in zip(e, s1))
        out[e2] = out.get(e2, 0) + c / c1
    for e, c in g2.items():
        e2 = tuple(a + b for a, b in zip(e, s2))
        v = out.get(e2, 0) - c / c2
        if v:
            out[e2] = v
        else:
            out.pop(e2, None)
    return {e: c for e, c in out.items() if c}


def groebner(
    polys: Sequence[Poly],
    order: str = "grevlex",
    weights: Sequence[int] | None = None,
    cap: int = DEFAULT_CAP,
) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``polys``.

    ``cap`` bounds the number of S-pairs processed; exceeding it raises
    :class:`ResourceCapExceeded`.
    """
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("empty generator list")
    vars_ = polys[0].vars
    for p in polys:
        if p.vars != vars_:
            raise ValueError("generators live in different rings")
    w = tuple(weights) if weights is not None else None
    key = order_key(order, w)
    ring = _Ring(key)
    sugar_w = w if w is not None else (1,) * len(vars_)
    # sugar misbehaves under lex (coefficient blow-up); use the normal strategy there
    use_sugar = order != "lex"

    def sdeg(e):
        return sum(a * b for a, b in zip(e, sugar_w))

    G: list[tuple[Exp, Fraction, dict]] = []
    sugar: list[int] = []
    active: list[bool] = []
    heap: list = []
    counter = 0

    def update(h_idx: int):
        nonlocal counter, heap
        lh = G[h_idx][0]
        C = [i for i in range(h_idx) if active[i]]
        lcms = {i: _lcm(G[i][0], lh) for i in C}
        D = []
        for pos, i in enumerate(C):
            li = lcms[i]
            if _coprime(G[i][0], lh):
                D.append(i)
                continue
            others = C[pos + 1:]
            if any(_divides(lcms[j], li) for j in others) or any(_divides(lcms[j], li) for j in D):
                continue
            D.append(i)
        E = [i for i in D if not _coprime(G[i][0], lh)]
        # prune old pairs through the new leading monomial
        kept = []
        for item in heap:
            _, _, _, i, j, lij = item
            if _divides(lh, lij) and _lcm(G[i][0], lh) != lij and _lcm(G[j][0], lh) != lij:
                continue
            kept.append(item)
        heap = kept
        heapq.heapify(heap)
        for i in E:
            lij = lcms[i]
            s = max(sugar[i] + sdeg(lij) - sdeg(G[i][0]), sugar[h_idx] + sdeg(lij) - sdeg(lh))
            counter += 1
            heapq.heappush(heap, (s if use_sugar else 0, key(lij), counter, i, h_idx, lij))
        for i in range(h_idx):
            if active[i] and _divides(lh, G[i][0]):
                active[i] = False

    for p in polys:
        lm = ring.lead(p.terms)
        G.append((lm, p.terms[lm], dict(p.terms)))
        sugar.append(max(sdeg(e) for e in p.terms))
        active.append(True)
        update(len(G) - 1)

    processed = 0
    while heap:
        s, _, _, i, j, _ = heapq.heappop(heap)
        processed += 1
        if processed > cap:
            raise ResourceCapExceeded(f"Groebner computation exceeded {cap} S-pairs")
        sp = _spoly(*G[i], *G[j])
        basis = [G[k] for k in range(len(G)) if active[k]]
        r = ring.reduce(sp, basis, full=True)
        if r:
            lm = ring.lead(r)
            lc = r[lm]
            r = {e: c / lc for e, c in r.items()}
            G.append((lm, Fraction(1), r))
            sugar.append(s)
            active.append(True)
            update(len(G) - 1)

    # minimal then reduced basis
    basis = [G[k] for k in range(len(G)) if active[k]]
    minimal = []
    for idx, (lm, lc, g) in enumerate(basis):
        if any(_divides(o[0], lm) and (o[0] != lm or jdx < idx)
               for jdx, o in enumerate(basis) if jdx != idx):
            continue
        minimal.append((lm, lc, {e: c / lc for e, c in g.items()}))
    reduced = []
    for idx, (lm, _, g) in enumerate(minimal):
        others = [(l2, Fraction(1), g2) for k, (l2, _, g2) in enumerate(minimal) if k != idx]
        tail = {e: c for e, c in g.items() if e != lm}
        rt = ring.reduce(tail, others)
        rt[lm] = Fraction(1)
        reduced.append(Poly(vars_, rt))
    reduced.sort(key=lambda p: key(max(p.terms, key=key)))
    return GroebnerBasis(vars_, order, w, reduced)
