"""Buchberger's algorithm, normal forms and exact division."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .poly import Exponent, Poly, order_key


class GroebnerBudgetExceeded(RuntimeError):
    """Raised when a basis computation exceeds its S-pair budget."""


class MissingBasisError(ValueError):
    pass


def _divides(a: Exponent, b: Exponent) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exponent, b: Exponent) -> Exponent:
    return tuple(max(x, y) for x, y in zip(a, b))


def _normal_form(f: Poly, basis: Sequence[Poly], order: str, leads=None) -> Poly:
    if not f.terms or not basis:
        return f
    key = order_key(order)
    if leads is None:
        leads = [g.leading(order) for g in basis]
    rem = dict(f.terms)
    out = {}
    while rem:
        e = max(rem, key=key)
        c = rem[e]
        for g, (ge, gc) in zip(basis, leads):
            if _divides(ge, e):
                shift = tuple(x - y for x, y in zip(e, ge))
                factor = c / gc
                for te, tc in g.terms.items():
                    t = tuple(a + b for a, b in zip(te, shift))
                    s = rem.get(t, 0) - factor * tc
                    if s:
                        rem[t] = s
                    else:
                        rem.pop(t, None)
                break
        else:
            out[e] = c
            del rem[e]
    return Poly._raw(f.vars, out)


def divide(f: Poly, g: Poly, order: str = "grevlex") -> Tuple[Poly, Poly]:
    """Division by a single polynomial: f = q*g + r with r reduced w.r.t. lt(g)."""
    if not g.terms:
        raise ZeroDivisionError("division by the zero polynomial")
    key = order_key(order)
    ge, gc = g.leading(order)
    rem = dict(f.terms)
    q = {}
    r = {}
    while rem:
        e = max(rem, key=key)
        c = rem[e]
        if _divides(ge, e):
            shift = tuple(x - y for x, y in zip(e, ge))
            factor = c / gc
            q[shift] = q.get(shift, 0) + factor
            for te, tc in g.terms.items():
                t = tuple(a + b for a, b in zip(te, shift))
                s = rem.get(t, 0) - factor * tc
                if s:
                    rem[t] = s
                else:
                    rem.pop(t, None)
        else:
            r[e] = c
            del rem[e]
    return Poly(f.vars, q), Poly._raw(f.vars, r)


def exact_quotient(f: Poly, g: Poly) -> Optional[Poly]:
    """f/g if g divides f, else None."""
    q, r = divide(f, g)
    return q if not r.terms else None


def _autoreduce(G: List[Poly], order: str) -> List[Poly]:
    key = order_key(order)
    G = [g.monic(order) for g in G if g.terms]
    # minimal basis: drop elements whose leading monomial is divisible by another's
    G.sort(key=lambda g: key(g.leading(order)[0]))
    minimal: List[Poly] = []
    for g in G:
        ge = g.leading(order)[0]
        if not any(_divides(h.leading(order)[0], ge) for h in minimal):
            minimal.append(g)
    reduced = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1:]
        ge, gc = g.leading(order)
        tail = Poly._raw(g.vars, {e: c for e, c in g.terms.items() if e != ge})
        tail = _normal_form(tail, others, order)
        t = dict(tail.terms)
        t[ge] = gc
        reduced.append(Poly._raw(g.vars, t))
    reduced.sort(key=lambda g: key(g.leading(order)[0]), reverse=True)
    return reduced


def buchberger(gens: Sequence[Poly], order: str = "grevlex", max_pairs: Optional[int] = None) -> List[Poly]:
    """Reduced Groebner basis.

    Normal selection strategy (smallest lcm first) with the coprime-leading-
    monomial criterion and Buchberger's chain criterion.
    """
    order_key(order)  # validates the tag
    G = [g.monic(order) for g in gens if g.terms]
    if not G:
        return []
    if any(g.is_constant() for g in G):
        return [Poly.one(G[0].vars)]
    key = order_key(order)
    leads = [g.leading(order) for g in G]
    pairs = {(i, j) for j in range(len(G)) for i in range(j)}
    processed = 0
    while pairs:
        i, j = min(pairs, key=lambda p: (key(_lcm(leads[p[0]][0], leads[p[1]][0])), p))
        pairs.discard((i, j))
        ei, ej = leads[i][0], leads[j][0]
        lcm = _lcm(ei, ej)
        if all(a == 0 or b == 0 for a, b in zip(ei, ej)):
            continue
        chain = False
        for k in range(len(G)):
            if k in (i, j):
                continue
            if _divides(leads[k][0], lcm):
                pik = (min(i, k), max(i, k))
                pjk = (min(j, k), max(j, k))
                if pik not in pairs and pjk not in pairs:
                    chain = True
                    break
        if chain:
            continue
        processed += 1
        if max_pairs is not None and processed > max_pairs:
            raise GroebnerBudgetExceeded(f"more than {max_pairs} S-pairs")
        si = tuple(a - b for a, b in zip(lcm, ei))
        sj = tuple(a - b for a, b in zip(lcm, ej))
        s = G[i].mul_term(si, 1 / leads[i][1]) - G[j].mul_term(sj, 1 / leads[j][1])
        r = _normal_form(s, G, order, leads)
        if r.terms:
            r = r.monic(order)
            if r.is_constant():
                return [Poly.one(r.vars)]
            n = len(G)
            G.append(r)
            leads.append(r.leading(order))
            pairs |= {(k, n) for k in range(n)}
    return _autoreduce(G, order)


class Ideal:
    """Polynomial ideal with its reduced Groebner basis computed at construction."""

    def __init__(self, gens: Sequence[Poly], order: str = "grevlex", max_pairs: Optional[int] = None):
        gens = list(gens)
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        vars = gens[0].vars
        if any(g.vars != vars for g in gens):
            raise ValueError("generators must share one variable list")
        self.vars = vars
        self.gens = tuple(gens)
        self.order = order
        self.basis = tuple(buchberger(gens, order, max_pairs))
        self._leads = [g.leading(order) for g in self.basis]

    def reduce(self, f: Poly) -> Poly:
        if f.vars != self.vars:
            raise ValueError("variable mismatch")
        return _normal_form(f, self.basis, self.order, self._leads)

    def contains(self, f: Poly) -> bool:
        return not self.reduce(f).terms

    def is_unit_ideal(self) -> bool:
        return len(self.basis) == 1 and self.basis[0].is_constant()

    def standard_monomials(self, degree: int):
        """Monomials of degree <= ``degree`` outside the leading-term ideal."""
        from .poly import monomials_up_to

        leads = [e for e, _ in self._leads]
        return [e for e in monomials_up_to(len(self.vars), degree)
                if not any(_divides(l, e) for l in leads)]

    def __repr__(self):
        return f"Ideal({[str(g) for g in self.basis]}, order={self.order!r})"


def groebner(gens: Sequence[Poly], order: str = "grevlex") -> Ideal:
    return Ideal(gens, order)


def reduce(f: Poly, basis) -> Poly:
    """Normal form of ``f`` against an :class:`Ideal` (or its basis)."""
    if not isinstance(basis, Ideal):
        raise MissingBasisError("reduce needs an ideal with a computed Groebner basis")
    return basis.reduce(f)
