"""Exact linear systems over Q by fraction-free elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Hashable, List, Optional, Sequence


@dataclass
class LinSystem:
    """Sparse rows ``{unknown: coefficient}`` with right-hand sides."""

    unknowns: List[Hashable] = field(default_factory=list)
    rows: List[Dict[Hashable, Fraction]] = field(default_factory=list)
    rhs: List[Fraction] = field(default_factory=list)

    def add_unknown(self, tag: Hashable) -> None:
        self.unknowns.append(tag)

    def add_row(self, coeffs: Dict[Hashable, Fraction], rhs=0) -> None:
        coeffs = {k: Fraction(v) for k, v in coeffs.items() if v}
        rhs = Fraction(rhs)
        if coeffs or rhs:
            self.rows.append(coeffs)
            self.rhs.append(rhs)


@dataclass
class Solution:
    values: Dict[Hashable, Fraction]
    nullity: int
    feasible = True


@dataclass
class Infeasible:
    """``certificate`` y satisfies y^T A = 0 and y^T b != 0."""

    certificate: Dict[int, Fraction]
    feasible = False


def _normalize(row: List[int]) -> List[int]:
    g = 0
    for c in row:
        if c:
            g = gcd(g, c)
            if g == 1:
                return row
    return [c // g for c in row] if g > 1 else row


def _integer_row(row: Sequence[Fraction]) -> List[int]:
    den = 1
    for c in row:
        if c:
            den = lcm(den, c.denominator)
    return _normalize([int(c * den) for c in row])


def _eliminate(rows: List[List[int]], ncols: int):
    pivots = []
    prow = 0
    m = len(rows)
    for c in range(ncols):
        piv = next((r for r in range(prow, m) if rows[r][c]), None)
        if piv is None:
            continue
        rows[prow], rows[piv] = rows[piv], rows[prow]
        p = rows[prow]
        a = p[c]
        for r in range(m):
            b = rows[r][c]
            if r != prow and b:
                rows[r] = _normalize([a * x - b * y for x, y in zip(rows[r], p)])
        pivots.append(c)
        prow += 1
    return pivots


def solve_linear(sys: LinSystem):
    """Particular solution (free unknowns set to 0) plus nullity, or a certificate."""
    cols = {u: i for i, u in enumerate(sys.unknowns)}
    n = len(cols)
    m = len(sys.rows)

    def build(with_identity: bool):
        out = []
        for r, (coeffs, b) in enumerate(zip(sys.rows, sys.rhs)):
            dense = [Fraction(0)] * (n + 1 + (m if with_identity else 0))
            for u, c in coeffs.items():
                dense[cols[u]] += c
            dense[n] = b
            if with_identity:
                dense[n + 1 + r] = Fraction(1)
            out.append(_integer_row(dense))
        return out

    rows = build(False)
    pivots = _eliminate(rows, n)
    rank = len(pivots)
    if any(rows[r][n] for r in range(rank, m)):
        rows = build(True)
        _eliminate(rows, n)
        for r in range(rank, m):
            if rows[r][n]:
                cert = {i: Fraction(rows[r][n + 1 + i]) for i in range(m) if rows[r][n + 1 + i]}
                return Infeasible(cert)
    values = {u: Fraction(0) for u in sys.unknowns}
    for r, c in enumerate(pivots):
        values[sys.unknowns[c]] = Fraction(rows[r][n], rows[r][c])
    return Solution(values, n - rank)


def residual(sys: LinSystem, values: Dict[Hashable, Fraction]) -> List[Fraction]:
    return [sum((c * values[u] for u, c in row.items()), Fraction(0)) - b
            for row, b in zip(sys.rows, sys.rhs)]
