"""Chart rings Q[z][1/h], their fractions, and ideals localized at h.

A chart ring has a single distinguished denominator ``h``; every element is
stored as ``num / h**k`` with ``k >= 0`` and, where possible, ``num`` not
divisible by ``h``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .groebner import GroebnerBudgetExceeded, Ideal, exact_quotient
from .poly import Poly


class NotAUnitError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Ring:
    """The localization Q[vars][1/h]."""

    vars: Tuple[str, ...]
    h: Poly = None
    order: str = "grevlex"

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.h is None:
            object.__setattr__(self, "h", Poly.one(self.vars))
        if self.h.vars != self.vars:
            raise ValueError("denominator lives in a different polynomial ring")
        if self.h.is_zero():
            raise ValueError("distinguished denominator must be nonzero")

    @property
    def affine(self) -> bool:
        return self.h.is_constant()

    def poly(self, p: Union[Poly, int, Fraction]) -> "RatFunc":
        if isinstance(p, (int, Fraction)):
            p = Poly.constant(p, self.vars)
        return RatFunc(p, 0, self)

    def zero(self) -> "RatFunc":
        return RatFunc(Poly.zero(self.vars), 0, self)

    def one(self) -> "RatFunc":
        return RatFunc(Poly.one(self.vars), 0, self)

    def var(self, name) -> "RatFunc":
        return RatFunc(Poly.variable(name, self.vars), 0, self)

    def frac(self, num: Poly, k: int) -> "RatFunc":
        return RatFunc(num, k, self)

    def __str__(self):
        if self.affine:
            return f"Q[{', '.join(self.vars)}]"
        return f"Q[{', '.join(self.vars)}][1/({self.h})]"


class RatFunc:
    """Element ``num / h**k`` of a chart ring."""

    __slots__ = ("num", "k", "ring")

    def __init__(self, num: Poly, k: int, ring: Ring):
        if num.vars != ring.vars:
            raise ValueError("numerator variables differ from the ring's")
        if k < 0:
            raise ValueError("negative denominator power")
        h = ring.h
        if h.is_constant():
            if k:
                num = num / (h.constant_value() ** k)
            k = 0
        elif num.is_zero():
            k = 0
        else:
            while k:
                q = exact_quotient(num, h)
                if q is None:
                    break
                num, k = q, k - 1
        self.num = num
        self.k = k
        self.ring = ring

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, Poly):
            return RatFunc(other, 0, self.ring)
        if isinstance(other, (int, Fraction)):
            return self.ring.poly(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        h = self.ring.h
        if self.k == other.k:
            return RatFunc(self.num + other.num, self.k, self.ring)
        if self.k > other.k:
            return RatFunc(self.num + other.num * h ** (self.k - other.k), self.k, self.ring)
        return RatFunc(self.num * h ** (other.k - self.k) + other.num, other.k, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.k, self.ring)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.num * other, self.k, self.ring)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.num * other.num, self.k + other.k, self.ring)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.num / other, self.k, self.ring)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RatFunc(self.num ** e, self.k * e, self.ring)

    def inverse(self, bound: int = 32) -> "RatFunc":
        """Inverse of a unit; raises :class:`NotAUnitError` otherwise.

        ``num`` is a unit iff it divides some power of ``h``; powers up to
        ``bound`` are tried.
        """
        num, h = self.num, self.ring.h
        if num.is_zero():
            raise NotAUnitError("zero is not invertible")
        if num.is_constant():
            return RatFunc(Poly.constant(1 / num.constant_value(), self.ring.vars) * h ** self.k, 0, self.ring)
        if h.is_constant():
            raise NotAUnitError(f"{num} is not a unit in {self.ring}")
        hp = Poly.one(self.ring.vars)
        for m in range(1, bound + 1):
            hp = hp * h
            q = exact_quotient(hp, num)
            if q is not None:
                return RatFunc(q * h ** self.k, m, self.ring)
        raise NotAUnitError(f"{num} is not a unit in {self.ring}")

    def is_unit(self) -> bool:
        try:
            self.inverse()
        except NotAUnitError:
            return False
        return True

    # -- calculus ------------------------------------------------------------
    def diff(self, i: int) -> "RatFunc":
        if self.k == 0:
            return RatFunc(self.num.diff(i), 0, self.ring)
        h = self.ring.h
        return RatFunc(self.num.diff(i) * h - self.num * h.diff(i) * self.k, self.k + 1, self.ring)

    def diff_multi(self, mu: Sequence[int]) -> "RatFunc":
        if self.k == 0:
            return RatFunc(self.num.diff_multi(tuple(mu)), 0, self.ring)
        f = self
        for i, m in enumerate(mu):
            for _ in range(m):
                f = f.diff(i)
        return f

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.k == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            other = self._coerce(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.ring == other.ring and (self - other).num.is_zero()

    def __hash__(self):
        return hash((self.num, self.k, self.ring))

    def to_ring(self, target: Ring) -> "RatFunc":
        """Re-express in a ring over the same variables where our h is a unit."""
        if target == self.ring:
            return self
        if target.vars != self.ring.vars:
            raise ValueError("to_ring needs the same variables")
        if self.k == 0:
            return RatFunc(self.num, 0, target)
        hinv = RatFunc(self.ring.h, 0, target).inverse()
        return RatFunc(self.num, 0, target) * hinv ** self.k

    def __str__(self):
        if self.k == 0:
            return str(self.num)
        den = f"({self.ring.h})" if len(self.ring.h.terms) > 1 else str(self.ring.h)
        den = den if self.k == 1 else f"{den}^{self.k}"
        return f"({self.num})/{den}"

    def __repr__(self):
        return f"RatFunc({str(self)!r})"

    def to_json(self):
        return [str(self.num), self.k] if self.k else str(self.num)


def substitute(f: RatFunc, images: Sequence[RatFunc], target: Ring) -> RatFunc:
    """Pull ``f`` back along a coordinate change given by ``images``."""
    images = [g if isinstance(g, RatFunc) else RatFunc(g, 0, target) for g in images]
    if any(g.ring != target for g in images):
        images = [g.to_ring(target) for g in images]
    num = _subs_poly(f.num, images, target)
    if f.k == 0:
        return num
    den = _subs_poly(f.ring.h, images, target)
    return num * den.inverse() ** f.k


def _subs_poly(p: Poly, images: Sequence[RatFunc], target: Ring) -> RatFunc:
    out = target.zero()
    cache: Dict[Tuple[int, int], RatFunc] = {}
    for e, c in p.terms.items():
        term = target.poly(c)
        for i, k in enumerate(e):
            if k:
                pw = cache.get((i, k))
                if pw is None:
                    pw = images[i] ** k
                    cache[(i, k)] = pw
                term = term * pw
        out = out + term
    return out


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDECIDED = "undecided"

    def __bool__(self):
        return self is Verdict.TRUE


class LocalIdeal:
    """An ideal of Q[z] extended to Q[z][1/h].

    Membership is decided through the saturation I : h^oo, obtained by
    eliminating ``t`` from I + (1 - t*h).  When that computation exceeds its
    pair budget, membership falls back to testing h^k f in I for
    k <= ``saturation_bound`` and may answer :attr:`Verdict.UNDECIDED`.
    """

    def __init__(self, ring: Ring, gens: Sequence[Poly], saturation_bound: int = 10,
                 max_pairs: Optional[int] = 5000):
        self.ring = ring
        self.gens = tuple(g.num if isinstance(g, RatFunc) else g for g in gens)
        self.saturation_bound = saturation_bound
        if not self.gens:
            self.gens = (Poly.zero(ring.vars),)
        self.ideal = Ideal(list(self.gens), ring.order)
        self.saturated: Optional[Ideal] = None
        if ring.affine or all(g.is_zero() for g in self.gens):
            self.saturated = self.ideal
        else:
            try:
                self.saturated = _saturate(self.gens, ring.h, ring.order, max_pairs)
            except GroebnerBudgetExceeded:
                self.saturated = None

    @property
    def exact(self) -> bool:
        return self.saturated is not None

    def membership(self, f: Union[RatFunc, Poly]) -> Verdict:
        num = f.num if isinstance(f, RatFunc) else f
        if self.saturated is not None:
            return Verdict.TRUE if self.saturated.contains(num) else Verdict.FALSE
        hk = num
        for _ in range(self.saturation_bound + 1):
            if self.ideal.contains(hk):
                return Verdict.TRUE
            hk = hk * self.ring.h
        return Verdict.UNDECIDED

    def contains(self, f) -> bool:
        v = self.membership(f)
        if v is Verdict.UNDECIDED:
            raise UndecidedError(f"membership of {f} undecided at saturation bound {self.saturation_bound}")
        return v is Verdict.TRUE

    def normal_form(self, f: RatFunc) -> RatFunc:
        """Representative with numerator reduced modulo the saturation."""
        basis = self.saturated or self.ideal
        return RatFunc(basis.reduce(f.num), f.k, self.ring)

    def reduce_poly(self, p: Poly) -> Poly:
        return (self.saturated or self.ideal).reduce(p)

    def standard_monomials(self, degree: int):
        return (self.saturated or self.ideal).standard_monomials(degree)

    def localize(self, ring: Ring) -> "LocalIdeal":
        return LocalIdeal(ring, self.gens, self.saturation_bound)


class UndecidedError(RuntimeError):
    pass


def _saturate(gens: Sequence[Poly], h: Poly, order: str, max_pairs) -> Ideal:
    vars = h.vars
    t = "_t"
    while t in vars:
        t += "_"
    ext = (t,) + vars
    tpoly = Poly.variable(t, ext)
    ext_gens = [g.extend(ext) for g in gens] + [Poly.one(ext) - tpoly * h.extend(ext)]
    big = Ideal(ext_gens, "elim1", max_pairs)
    kept = [g.restrict(vars) for g in big.basis if g.degree_in(0) <= 0]
    if not kept:
        kept = [Poly.zero(vars)]
    return Ideal(kept, order)


def saturate_membership(f: Poly, I: Sequence[Poly], h: Poly, bound: int = 10, exact: bool = True) -> Verdict:
    """Is h^k f in I for some k?  ``exact=False`` uses only the power bound."""
    ring = Ring(f.vars, h)
    li = LocalIdeal(ring, I, saturation_bound=bound, max_pairs=None if exact else 0)
    return li.membership(f)


# -- small matrices over chart rings ----------------------------------------

def det(m: Sequence[Sequence[RatFunc]]) -> RatFunc:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else m[0][0].ring.zero()


def mat_inverse(m: Sequence[Sequence[RatFunc]], det_reducer=None) -> List[List[RatFunc]]:
    """Adjugate inverse.  ``det_reducer`` may replace the determinant by a
    representative modulo an ideal before inversion."""
    n = len(m)
    d = det(m)
    if det_reducer is not None:
        d = det_reducer(d)
    dinv = d.inverse()
    if n == 1:
        return [[dinv]]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = det(minor)
            if (i + j) % 2:
                c = -c
            inv[j][i] = c * dinv
    return inv


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][l] * b[l][j] for l in range(1, k)), a[i][0] * b[0][j]) for j in range(m)] for i in range(n)]
