"""Exact rational feasibility LP: find x >= 0 with A x >= b (two-phase simplex, Bland's rule)."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import LPFailure


def feasible_point(a: Sequence[Sequence], b: Sequence, max_pivots: int = 100000) -> list[Fraction] | None:
    """A nonnegative solution of ``a x >= b`` or None when infeasible."""
    m = len(a)
    if m == 0:
        return []
    n = len(a[0])
    # rows: a x - s + r = b with b made nonnegative; r artificial
    ncols = n + m + m
    tab: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(x) for x in a[i]] + [Fraction(0)] * (2 * m) + [Fraction(b[i])]
        row[n + i] = Fraction(-1)
        if row[-1] < 0:
            row = [-x for x in row]
        row[n + m + i] = Fraction(1)
        tab.append(row)
    basis = [n + m + i for i in range(m)]
    # objective: minimize sum of artificials -> reduced costs
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            obj[j] -= tab[i][j]
    for i in range(m):
        obj[n + m + i] += 1

    pivots = 0
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][-1] / tab[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise LPFailure("phase-one problem unbounded")
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter]:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[leave])]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, tab[leave])]
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise LPFailure("pivot limit reached")
    if -obj[-1] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][-1]
    for row, rhs in zip(a, b):
        if sum(Fraction(c) * v for c, v in zip(row, x)) < rhs:
            raise LPFailure("simplex returned an infeasible point")
    return x
