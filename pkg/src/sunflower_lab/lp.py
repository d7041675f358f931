"""Exact rational simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is feasible when ``b >= 0``, so no phase one is needed. Pivoting
follows Bland's rule, which cannot cycle. Rows are kept sparse since the
regularity constraint matrices are 0/1 and mostly empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import InputError, ResourceBudgetError


@dataclass
class LPResult:
    status: str  # "optimal" | "unbounded"
    x: list[Fraction]
    value: Fraction
    tight_rows: list[int]
    pivots: int


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence, max_pivots: int | None = None) -> LPResult:
    n = len(c)
    m = len(A)
    if len(b) != m:
        raise InputError("row count mismatch between A and b")
    rhs = [Fraction(v) for v in b]
    if any(v < 0 for v in rhs):
        raise InputError("this solver needs b >= 0 (origin feasible)")

    rows: list[dict[int, Fraction]] = []
    for i, arow in enumerate(A):
        if len(arow) != n:
            raise InputError(f"row {i} has {len(arow)} entries, expected {n}")
        row = {j: Fraction(v) for j, v in enumerate(arow) if v != 0}
        row[n + i] = Fraction(1)
        rows.append(row)
    basis = [n + i for i in range(m)]
    cost = {j: Fraction(v) for j, v in enumerate(c) if v != 0}
    z = Fraction(0)
    pivots = 0

    while True:
        entering = min((j for j, v in cost.items() if v > 0), default=None)
        if entering is None:
            break
        best = None
        for i, row in enumerate(rows):
            a = row.get(entering)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return LPResult("unbounded", [], Fraction(0), [], pivots)
        if max_pivots is not None and pivots >= max_pivots:
            raise ResourceBudgetError(f"LP exceeded pivot budget of {max_pivots}")
        r = best[1]
        prow = rows[r]
        piv = prow[entering]
        if piv != 1:
            inv = 1 / piv
            prow = {j: v * inv for j, v in prow.items()}
            rhs[r] *= inv
            rows[r] = prow
        pitems = list(prow.items())
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row.get(entering)
            if f is None:
                continue
            for j, v in pitems:
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            rhs[i] -= f * rhs[r]
        f = cost.get(entering)
        for j, v in pitems:
            nv = cost.get(j, 0) - f * v
            if nv:
                cost[j] = nv
            else:
                cost.pop(j, None)
        z += f * rhs[r]
        basis[r] = entering
        pivots += 1

    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = rhs[i]
    tight = [i for i in range(m) if x[n + i] == 0]
    return LPResult("optimal", x[:n], z, tight, pivots)
